#include "tailcast/models.hpp"

#include <algorithm>
#include <cmath>

namespace tailcast {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

constexpr double kArStdFloor = 1e-12;

// Offsets into the flat parameter vector.
struct GruLayout {
    int H;
    std::size_t Wz, Uz, bz, Wr, Ur, br, Wn, Un, bn, wm, bm, ws, bs;

    explicit GruLayout(int hidden) : H(hidden) {
        const std::size_t Hs = static_cast<std::size_t>(hidden);
        const std::size_t gate = Hs * Hs + 2 * Hs;
        Wz = 0;
        Uz = Wz + Hs;
        bz = Uz + Hs * Hs;
        Wr = gate;
        Ur = Wr + Hs;
        br = Ur + Hs * Hs;
        Wn = 2 * gate;
        Un = Wn + Hs;
        bn = Un + Hs * Hs;
        wm = 3 * gate;
        bm = wm + Hs;
        ws = bm + 1;
        bs = ws + Hs;
    }
};

// z/r/n write into spans of length H; rh is scratch for r (.) h_prev.
void gru_step_forward(const GruLayout& L, const double* p, double x, const double* h_prev,
                      double* z, double* r, double* n, double* h_new, double* rh) {
    const int H = L.H;
    for (int i = 0; i < H; ++i) {
        double az = p[L.Wz + static_cast<std::size_t>(i)] * x + p[L.bz + static_cast<std::size_t>(i)];
        double ar = p[L.Wr + static_cast<std::size_t>(i)] * x + p[L.br + static_cast<std::size_t>(i)];
        const double* uz = p + L.Uz + static_cast<std::size_t>(i) * static_cast<std::size_t>(H);
        const double* ur = p + L.Ur + static_cast<std::size_t>(i) * static_cast<std::size_t>(H);
        for (int j = 0; j < H; ++j) {
            az += uz[j] * h_prev[j];
            ar += ur[j] * h_prev[j];
        }
        z[i] = sigmoid(az);
        r[i] = sigmoid(ar);
    }
    for (int j = 0; j < H; ++j) rh[j] = r[j] * h_prev[j];
    for (int i = 0; i < H; ++i) {
        double an = p[L.Wn + static_cast<std::size_t>(i)] * x + p[L.bn + static_cast<std::size_t>(i)];
        const double* un = p + L.Un + static_cast<std::size_t>(i) * static_cast<std::size_t>(H);
        for (int j = 0; j < H; ++j) an += un[j] * rh[j];
        n[i] = std::tanh(an);
        h_new[i] = (1.0 - z[i]) * n[i] + z[i] * h_prev[i];
    }
}

// Accumulates parameter gradients into g; returns via dx/dh_prev the input
// and state gradients. dh_new is consumed.
void gru_step_backward(const GruLayout& L, const double* p, double x, const double* h_prev,
                       const double* z, const double* r, const double* n, const double* dh_new,
                       double* g, double* dx, double* dh_prev, double* scratch) {
    const int H = L.H;
    double* dz_pre = scratch;
    double* dr_pre = scratch + H;
    double* dn_pre = scratch + 2 * H;
    double* drh = scratch + 3 * H;

    for (int i = 0; i < H; ++i) {
        const double dz = dh_new[i] * (h_prev[i] - n[i]);
        const double dn = dh_new[i] * (1.0 - z[i]);
        dh_prev[i] = dh_new[i] * z[i];
        dn_pre[i] = dn * (1.0 - n[i] * n[i]);
        dz_pre[i] = dz * z[i] * (1.0 - z[i]);
    }
    // n-gate: gradients wrt Wn/Un/bn and r (.) h_prev
    for (int j = 0; j < H; ++j) drh[j] = 0.0;
    for (int i = 0; i < H; ++i) {
        const std::size_t row = static_cast<std::size_t>(i) * static_cast<std::size_t>(H);
        g[L.Wn + static_cast<std::size_t>(i)] += dn_pre[i] * x;
        g[L.bn + static_cast<std::size_t>(i)] += dn_pre[i];
        const double* un = p + L.Un + row;
        double* gun = g + L.Un + row;
        for (int j = 0; j < H; ++j) {
            gun[j] += dn_pre[i] * (r[j] * h_prev[j]);
            drh[j] += un[j] * dn_pre[i];
        }
    }
    for (int j = 0; j < H; ++j) {
        const double dr = drh[j] * h_prev[j];
        dh_prev[j] += drh[j] * r[j];
        dr_pre[j] = dr * r[j] * (1.0 - r[j]);
    }
    // z and r gates
    double dxv = 0.0;
    for (int i = 0; i < H; ++i) {
        const std::size_t row = static_cast<std::size_t>(i) * static_cast<std::size_t>(H);
        g[L.Wz + static_cast<std::size_t>(i)] += dz_pre[i] * x;
        g[L.bz + static_cast<std::size_t>(i)] += dz_pre[i];
        g[L.Wr + static_cast<std::size_t>(i)] += dr_pre[i] * x;
        g[L.br + static_cast<std::size_t>(i)] += dr_pre[i];
        const double* uz = p + L.Uz + row;
        const double* ur = p + L.Ur + row;
        double* guz = g + L.Uz + row;
        double* gur = g + L.Ur + row;
        for (int j = 0; j < H; ++j) {
            guz[j] += dz_pre[i] * h_prev[j];
            gur[j] += dr_pre[i] * h_prev[j];
            dh_prev[j] += uz[j] * dz_pre[i] + ur[j] * dr_pre[i];
        }
        dxv += p[L.Wz + static_cast<std::size_t>(i)] * dz_pre[i] +
               p[L.Wr + static_cast<std::size_t>(i)] * dr_pre[i] +
               p[L.Wn + static_cast<std::size_t>(i)] * dn_pre[i];
    }
    *dx = dxv;
}

}  // namespace

// --- AR ------------------------------------------------------------------

ForecastDistribution ArModel::forecast(std::span<const double> history, int horizon) const {
    if (static_cast<int>(history.size()) < order) {
        throw HistoryTooShort("ar_forecast: history of length " +
                              std::to_string(history.size()) + " shorter than order " +
                              std::to_string(order));
    }
    if (horizon < 1) throw InvalidParams("ar_forecast: horizon must be >= 1");

    ForecastDistribution out;
    out.means.resize(static_cast<std::size_t>(horizon));
    out.stds.resize(static_cast<std::size_t>(horizon));

    // rolling buffer of the most recent `order` values, newest first
    std::vector<double> recent(static_cast<std::size_t>(order));
    for (int i = 0; i < order; ++i) {
        recent[static_cast<std::size_t>(i)] = history[history.size() - 1 - static_cast<std::size_t>(i)];
    }
    for (int j = 0; j < horizon; ++j) {
        double m = intercept;
        for (int i = 0; i < order; ++i) m += coeffs[static_cast<std::size_t>(i)] * recent[static_cast<std::size_t>(i)];
        out.means[static_cast<std::size_t>(j)] = m;
        for (int i = order - 1; i > 0; --i) recent[static_cast<std::size_t>(i)] = recent[static_cast<std::size_t>(i - 1)];
        recent[0] = m;
    }

    // psi-weight recursion for multi-step forecast variance
    std::vector<double> psi(static_cast<std::size_t>(horizon));
    psi[0] = 1.0;
    for (int m = 1; m < horizon; ++m) {
        double s = 0.0;
        for (int i = 1; i <= std::min(m, order); ++i) {
            s += coeffs[static_cast<std::size_t>(i - 1)] * psi[static_cast<std::size_t>(m - i)];
        }
        psi[static_cast<std::size_t>(m)] = s;
    }
    double acc = 0.0;
    for (int j = 0; j < horizon; ++j) {
        acc += psi[static_cast<std::size_t>(j)] * psi[static_cast<std::size_t>(j)];
        out.stds[static_cast<std::size_t>(j)] = std::max(noise_std * std::sqrt(acc), kArStdFloor);
    }
    return out;
}

ArModel fit_ar(const std::vector<std::vector<double>>& series, int order) {
    if (order < 1) throw InvalidParams("fit_ar: order must be >= 1");
    if (series.empty()) throw InvalidParams("fit_ar: no series");
    for (std::size_t s = 0; s < series.size(); ++s) {
        if (static_cast<int>(series[s].size()) <= order) {
            throw SeriesTooShort("fit_ar: series " + std::to_string(s) + " has length " +
                                 std::to_string(series[s].size()) + ", need > " +
                                 std::to_string(order));
        }
    }

    const int p = order + 1;  // lags plus intercept
    std::vector<double> xtx(static_cast<std::size_t>(p) * static_cast<std::size_t>(p), 0.0);
    std::vector<double> xty(static_cast<std::size_t>(p), 0.0);
    std::vector<double> row(static_cast<std::size_t>(p));
    std::size_t n_rows = 0;

    for (const auto& y : series) {
        for (std::size_t t = static_cast<std::size_t>(order); t < y.size(); ++t) {
            for (int i = 0; i < order; ++i) {
                row[static_cast<std::size_t>(i)] = y[t - 1 - static_cast<std::size_t>(i)];
            }
            row[static_cast<std::size_t>(order)] = 1.0;
            for (int a = 0; a < p; ++a) {
                for (int b = 0; b < p; ++b) {
                    xtx[static_cast<std::size_t>(a * p + b)] +=
                        row[static_cast<std::size_t>(a)] * row[static_cast<std::size_t>(b)];
                }
                xty[static_cast<std::size_t>(a)] += row[static_cast<std::size_t>(a)] * y[t];
            }
            ++n_rows;
        }
    }

    // Gaussian elimination with partial pivoting.
    double scale = 0.0;
    for (double v : xtx) scale = std::max(scale, std::abs(v));
    const double tol = 1e-10 * std::max(scale, 1.0);
    std::vector<double> a = xtx;
    std::vector<double> b = xty;
    for (int col = 0; col < p; ++col) {
        int pivot = col;
        for (int r2 = col + 1; r2 < p; ++r2) {
            if (std::abs(a[static_cast<std::size_t>(r2 * p + col)]) >
                std::abs(a[static_cast<std::size_t>(pivot * p + col)])) {
                pivot = r2;
            }
        }
        if (std::abs(a[static_cast<std::size_t>(pivot * p + col)]) < tol) {
            throw RankDeficient("fit_ar: design matrix is rank deficient at column " +
                                std::to_string(col));
        }
        if (pivot != col) {
            for (int c2 = 0; c2 < p; ++c2) {
                std::swap(a[static_cast<std::size_t>(col * p + c2)],
                          a[static_cast<std::size_t>(pivot * p + c2)]);
            }
            std::swap(b[static_cast<std::size_t>(col)], b[static_cast<std::size_t>(pivot)]);
        }
        for (int r2 = col + 1; r2 < p; ++r2) {
            const double f = a[static_cast<std::size_t>(r2 * p + col)] /
                             a[static_cast<std::size_t>(col * p + col)];
            for (int c2 = col; c2 < p; ++c2) {
                a[static_cast<std::size_t>(r2 * p + c2)] -=
                    f * a[static_cast<std::size_t>(col * p + c2)];
            }
            b[static_cast<std::size_t>(r2)] -= f * b[static_cast<std::size_t>(col)];
        }
    }
    std::vector<double> beta(static_cast<std::size_t>(p));
    for (int r2 = p - 1; r2 >= 0; --r2) {
        double s = b[static_cast<std::size_t>(r2)];
        for (int c2 = r2 + 1; c2 < p; ++c2) {
            s -= a[static_cast<std::size_t>(r2 * p + c2)] * beta[static_cast<std::size_t>(c2)];
        }
        beta[static_cast<std::size_t>(r2)] = s / a[static_cast<std::size_t>(r2 * p + r2)];
    }

    ArModel model;
    model.order = order;
    model.coeffs.assign(beta.begin(), beta.begin() + order);
    model.intercept = beta[static_cast<std::size_t>(order)];

    double ssr = 0.0;
    for (const auto& y : series) {
        for (std::size_t t = static_cast<std::size_t>(order); t < y.size(); ++t) {
            double pred = model.intercept;
            for (int i = 0; i < order; ++i) {
                pred += model.coeffs[static_cast<std::size_t>(i)] * y[t - 1 - static_cast<std::size_t>(i)];
            }
            const double res = y[t] - pred;
            ssr += res * res;
        }
    }
    const std::size_t dof = n_rows > static_cast<std::size_t>(p) ? n_rows - static_cast<std::size_t>(p) : 0;
    model.noise_std = dof > 0 ? std::sqrt(std::max(ssr, 0.0) / static_cast<double>(dof)) : 0.0;
    return model;
}

// --- RNN -------------------------------------------------------------------

std::size_t RecurrentForecaster::param_count(int hidden_size) {
    const std::size_t H = static_cast<std::size_t>(hidden_size);
    return 3 * (H * H + 2 * H) + 2 * H + 2;
}

RecurrentForecaster make_rnn(int hidden_size, int k, int h, std::uint64_t seed) {
    if (hidden_size < 1) throw InvalidParams("make_rnn: hidden_size must be >= 1");
    WindowSpec{k, h}.validate();
    RecurrentForecaster model;
    model.hidden_size = hidden_size;
    model.k = k;
    model.h = h;
    model.params.resize(RecurrentForecaster::param_count(hidden_size));
    const double r = 1.0 / std::sqrt(static_cast<double>(hidden_size));
    Rng rng(seed);
    for (auto& w : model.params) w = rng.uniform(-r, r);
    return model;
}

ForecastDistribution rnn_forward(const RecurrentForecaster& model,
                                 std::span<const double> history, int horizon) {
    if (static_cast<int>(history.size()) != model.k) {
        throw ShapeMismatch("rnn_forward: history length " + std::to_string(history.size()) +
                            " does not match model k=" + std::to_string(model.k));
    }
    if (horizon < 1) throw InvalidParams("rnn_forward: horizon must be >= 1");
    if (model.params.size() != RecurrentForecaster::param_count(model.hidden_size)) {
        throw ShapeMismatch("rnn_forward: parameter vector size mismatch");
    }
    const GruLayout L(model.hidden_size);
    const int H = model.hidden_size;
    const double* p = model.params.data();

    std::vector<double> hbuf(static_cast<std::size_t>(H), 0.0);
    std::vector<double> hnew(static_cast<std::size_t>(H));
    std::vector<double> z(static_cast<std::size_t>(H)), r(static_cast<std::size_t>(H)),
        n(static_cast<std::size_t>(H)), rh(static_cast<std::size_t>(H));

    ForecastDistribution out;
    out.means.resize(static_cast<std::size_t>(horizon));
    out.stds.resize(static_cast<std::size_t>(horizon));

    for (double x : history) {
        gru_step_forward(L, p, x, hbuf.data(), z.data(), r.data(), n.data(), hnew.data(), rh.data());
        hbuf.swap(hnew);
    }
    double x_fb = history.back();
    for (int j = 0; j < horizon; ++j) {
        gru_step_forward(L, p, x_fb, hbuf.data(), z.data(), r.data(), n.data(), hnew.data(), rh.data());
        hbuf.swap(hnew);
        double mean = p[L.bm];
        double raw = p[L.bs];
        for (int i = 0; i < H; ++i) {
            mean += p[L.wm + static_cast<std::size_t>(i)] * hbuf[static_cast<std::size_t>(i)];
            raw += p[L.ws + static_cast<std::size_t>(i)] * hbuf[static_cast<std::size_t>(i)];
        }
        out.means[static_cast<std::size_t>(j)] = mean;
        out.stds[static_cast<std::size_t>(j)] = softplus(raw) + kStdFloor;
        x_fb = mean;
    }
    return out;
}

ForecastDistribution RecurrentForecaster::forecast(std::span<const double> history,
                                                   int horizon) const {
    return rnn_forward(*this, history, horizon);
}

RnnBatchLosses rnn_forward_batch(const RecurrentForecaster& model, const WindowedDataset& data,
                                 std::span<const int> indices, RnnWorkspace& ws) {
    if (indices.empty()) throw InvalidParams("rnn_forward_batch: empty batch");
    const GruLayout L(model.hidden_size);
    const int H = model.hidden_size;
    const int k = model.k;
    const int h = model.h;
    const double* p = model.params.data();

    if (ws.traces_.size() < indices.size()) ws.traces_.resize(indices.size());

    RnnBatchLosses losses;
    losses.base.resize(indices.size());
    losses.aux.resize(indices.size());

    std::vector<double> rh(static_cast<std::size_t>(H));

    for (std::size_t e = 0; e < indices.size(); ++e) {
        const auto& ex = data.examples.at(static_cast<std::size_t>(indices[e]));
        if (static_cast<int>(ex.history.size()) != k || static_cast<int>(ex.target.size()) != h) {
            throw ShapeMismatch("rnn_forward_batch: example window does not match model (k,h)");
        }
        auto& tr = ws.traces_[e];
        const int steps = k + h;
        const std::size_t sH = static_cast<std::size_t>(steps) * static_cast<std::size_t>(H);
        tr.inputs.resize(static_cast<std::size_t>(steps));
        tr.h_prev.resize(sH);
        tr.z.resize(sH);
        tr.r.resize(sH);
        tr.n.resize(sH);
        tr.means.resize(static_cast<std::size_t>(h));
        tr.raws.resize(static_cast<std::size_t>(h));
        tr.stds.resize(static_cast<std::size_t>(h));

        std::vector<double> hbuf(static_cast<std::size_t>(H), 0.0);
        std::vector<double> hnew(static_cast<std::size_t>(H));
        double nll = 0.0, mae = 0.0;
        double x_fb = 0.0;
        for (int t = 0; t < steps; ++t) {
            const double x = t < k ? ex.history[static_cast<std::size_t>(t)]
                                   : (t == k ? ex.history.back() : x_fb);
            const std::size_t off = static_cast<std::size_t>(t) * static_cast<std::size_t>(H);
            tr.inputs[static_cast<std::size_t>(t)] = x;
            std::copy(hbuf.begin(), hbuf.end(), tr.h_prev.begin() + static_cast<std::ptrdiff_t>(off));
            gru_step_forward(L, p, x, hbuf.data(), tr.z.data() + off, tr.r.data() + off,
                             tr.n.data() + off, hnew.data(), rh.data());
            hbuf.swap(hnew);
            if (t >= k) {
                const int j = t - k;
                double mean = p[L.bm];
                double raw = p[L.bs];
                for (int i = 0; i < H; ++i) {
                    mean += p[L.wm + static_cast<std::size_t>(i)] * hbuf[static_cast<std::size_t>(i)];
                    raw += p[L.ws + static_cast<std::size_t>(i)] * hbuf[static_cast<std::size_t>(i)];
                }
                const double std = softplus(raw) + kStdFloor;
                tr.means[static_cast<std::size_t>(j)] = mean;
                tr.raws[static_cast<std::size_t>(j)] = raw;
                tr.stds[static_cast<std::size_t>(j)] = std;
                const double y = ex.target[static_cast<std::size_t>(j)];
                nll += gaussian_nll(mean, std, y);
                mae += std::abs(mean - y);
                x_fb = mean;
            }
        }
        losses.base[e] = nll / static_cast<double>(h);
        losses.aux[e] = mae / static_cast<double>(h);
    }
    return losses;
}

std::vector<double> rnn_backward_batch(const RecurrentForecaster& model,
                                       const WindowedDataset& data, std::span<const int> indices,
                                       std::span<const double> gl, std::span<const double> ga,
                                       RnnWorkspace& ws) {
    if (gl.size() != indices.size() || ga.size() != indices.size()) {
        throw ShapeMismatch("rnn_backward_batch: upstream gradient size mismatch");
    }
    const GruLayout L(model.hidden_size);
    const int H = model.hidden_size;
    const int k = model.k;
    const int h = model.h;
    const double* p = model.params.data();
    const double hd = static_cast<double>(h);

    std::vector<double> grad(model.params.size(), 0.0);
    std::vector<double> dh(static_cast<std::size_t>(H));
    std::vector<double> dh_prev(static_cast<std::size_t>(H));
    std::vector<double> scratch(static_cast<std::size_t>(4 * H));
    std::vector<double> dmean(static_cast<std::size_t>(h));
    std::vector<double> draw(static_cast<std::size_t>(h));
    std::vector<double> h_last(static_cast<std::size_t>(H));

    for (std::size_t e = 0; e < indices.size(); ++e) {
        const auto& ex = data.examples.at(static_cast<std::size_t>(indices[e]));
        const auto& tr = ws.traces_[e];
        const double ub = gl[e];  // upstream d/d(base_e)
        const double ua = ga[e];  // upstream d/d(aux_e)
        if (ub == 0.0 && ua == 0.0) continue;

        // Per-step output gradients. dmean picks up feedback contributions
        // from later decode steps during the backward sweep.
        for (int j = 0; j < h; ++j) {
            const double mean = tr.means[static_cast<std::size_t>(j)];
            const double std = tr.stds[static_cast<std::size_t>(j)];
            const double y = ex.target[static_cast<std::size_t>(j)];
            const double d = mean - y;
            double dm = ub * d / (hd * std * std);
            if (d > 0.0) {
                dm += ua / hd;
            } else if (d < 0.0) {
                dm -= ua / hd;
            }
            dmean[static_cast<std::size_t>(j)] = dm;
            const double dstd = ub * (1.0 / std - d * d / (std * std * std)) / hd;
            draw[static_cast<std::size_t>(j)] = dstd * sigmoid(tr.raws[static_cast<std::size_t>(j)]);
        }

        std::fill(dh.begin(), dh.end(), 0.0);
        for (int t = k + h - 1; t >= 0; --t) {
            const std::size_t off = static_cast<std::size_t>(t) * static_cast<std::size_t>(H);
            if (t >= k) {
                const int j = t - k;
                const double dm = dmean[static_cast<std::size_t>(j)];
                const double dr = draw[static_cast<std::size_t>(j)];
                for (int i = 0; i < H; ++i) {
                    // head outputs read the post-step hidden state
                    dh[static_cast<std::size_t>(i)] +=
                        p[L.wm + static_cast<std::size_t>(i)] * dm +
                        p[L.ws + static_cast<std::size_t>(i)] * dr;
                }
                grad[L.bm] += dm;
                grad[L.bs] += dr;
            }
            // hidden state after step t: h_prev of step t+1, or recomputed for the last step
            const double* h_after;
            if (t + 1 < k + h) {
                h_after = tr.h_prev.data() + (static_cast<std::size_t>(t) + 1) * static_cast<std::size_t>(H);
            } else {
                const double* hp = tr.h_prev.data() + off;
                const double* z = tr.z.data() + off;
                const double* n = tr.n.data() + off;
                for (int i = 0; i < H; ++i) {
                    h_last[static_cast<std::size_t>(i)] = (1.0 - z[i]) * n[i] + z[i] * hp[i];
                }
                h_after = h_last.data();
            }
            if (t >= k) {
                const int j = t - k;
                const double dm = dmean[static_cast<std::size_t>(j)];
                const double dr = draw[static_cast<std::size_t>(j)];
                for (int i = 0; i < H; ++i) {
                    grad[L.wm + static_cast<std::size_t>(i)] += dm * h_after[i];
                    grad[L.ws + static_cast<std::size_t>(i)] += dr * h_after[i];
                }
            }
            double dx = 0.0;
            gru_step_backward(L, p, tr.inputs[static_cast<std::size_t>(t)], tr.h_prev.data() + off,
                              tr.z.data() + off, tr.r.data() + off, tr.n.data() + off, dh.data(),
                              grad.data(), &dx, dh_prev.data(), scratch.data());
            // the input of decode step j > 0 is the previous step's mean
            if (t > k) {
                dmean[static_cast<std::size_t>(t - k - 1)] += dx;
            }
            dh.swap(dh_prev);
        }
    }

    const double inv_n = 1.0 / static_cast<double>(indices.size());
    for (double& g : grad) g *= inv_n;
    return grad;
}

RnnLossAndGradient rnn_loss_and_gradient(const RecurrentForecaster& model,
                                         const WindowedDataset& data,
                                         std::span<const int> indices,
                                         const ModifierConfig& modifier, const GpdParams& gpd) {
    RnnWorkspace ws;
    auto losses = rnn_forward_batch(model, data, indices, ws);

    LossBatch batch{losses.base, losses.aux};
    std::vector<std::vector<double>> targets;
    if (modifier.kind == ModifierKind::Lds) {
        targets.reserve(indices.size());
        for (int idx : indices) targets.push_back(data.examples.at(static_cast<std::size_t>(idx)).target);
    }
    const auto ctx = make_modifier_context(modifier, batch, gpd, targets);
    const auto modified = apply_modifier(modifier, batch, ctx);
    const auto partials = modifier_partials(modifier, batch, ctx);

    RnnLossAndGradient out;
    out.base = std::move(losses.base);
    out.aux = std::move(losses.aux);
    out.mean_modified = vec_mean(modified);
    out.gradient = rnn_backward_batch(model, data, indices, partials.d_base, partials.d_aux, ws);
    return out;
}

double rnn_modified_batch_loss(const RecurrentForecaster& model, const WindowedDataset& data,
                               std::span<const int> indices, const ModifierConfig& modifier,
                               const ModifierContext& ctx) {
    RnnWorkspace ws;
    auto losses = rnn_forward_batch(model, data, indices, ws);
    LossBatch batch{std::move(losses.base), std::move(losses.aux)};
    return vec_mean(apply_modifier(modifier, batch, ctx));
}

}  // namespace tailcast
