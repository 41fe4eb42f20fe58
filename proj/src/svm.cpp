#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "ctg/baselines.hpp"
#include "ctg/errors.hpp"
#include "ctg/rng.hpp"

namespace ctg {

namespace {

double rbf(const std::vector<double>& a, const std::vector<double>& b, double gamma) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

// Platt's SMO with an error cache. Kernel values are precomputed when the
// matrix fits, otherwise evaluated on demand.
class SmoSolver {
public:
    SmoSolver(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
              const SvmConfig& cfg, std::uint64_t seed)
        : x_(x), y_(y), cfg_(cfg), rng_(seed), n_(x.size()) {
        alpha_.assign(n_, 0.0);
        error_.assign(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) error_[i] = -y_[i];  // f == 0 initially
        const std::size_t cache_limit = 6000;
        if (n_ <= cache_limit) {
            kernel_.resize(n_ * n_);
            for (std::size_t i = 0; i < n_; ++i) {
                for (std::size_t j = i; j < n_; ++j) {
                    const double k = rbf(x_[i], x_[j], cfg_.gamma);
                    kernel_[i * n_ + j] = k;
                    kernel_[j * n_ + i] = k;
                }
            }
        }
    }

    bool solve() {
        bool examine_all = true;
        std::size_t changed = 0;
        const std::size_t max_sweeps = std::max<std::size_t>(cfg_.max_passes_factor * n_, 100);
        std::size_t sweeps = 0;
        while ((changed > 0 || examine_all) && sweeps < max_sweeps) {
            ++sweeps;
            changed = 0;
            if (examine_all) {
                for (std::size_t i = 0; i < n_; ++i) changed += examine(i);
                examine_all = false;
            } else {
                for (std::size_t i = 0; i < n_; ++i) {
                    if (alpha_[i] > 0.0 && alpha_[i] < cfg_.c) changed += examine(i);
                }
                if (changed == 0) examine_all = true;
            }
        }
        return sweeps < max_sweeps;
    }

    const std::vector<double>& alpha() const { return alpha_; }
    double bias() const { return b_; }

    double decision(std::size_t i) const { return error_[i] + y_[i]; }

private:
    double kernel(std::size_t i, std::size_t j) const {
        if (!kernel_.empty()) return kernel_[i * n_ + j];
        return rbf(x_[i], x_[j], cfg_.gamma);
    }

    std::size_t examine(std::size_t i2) {
        const double y2 = y_[i2];
        const double a2 = alpha_[i2];
        const double e2 = error_[i2];
        const double r2 = e2 * y2;
        const bool violates = (r2 < -cfg_.tol && a2 < cfg_.c) || (r2 > cfg_.tol && a2 > 0.0);
        if (!violates) return 0;

        // second-choice heuristic: largest |E1 - E2| over the non-bound set
        std::ptrdiff_t best = -1;
        double best_gap = -1.0;
        for (std::size_t i = 0; i < n_; ++i) {
            if (alpha_[i] > 0.0 && alpha_[i] < cfg_.c) {
                const double gap = std::abs(error_[i] - e2);
                if (gap > best_gap) {
                    best_gap = gap;
                    best = static_cast<std::ptrdiff_t>(i);
                }
            }
        }
        if (best >= 0 && take_step(static_cast<std::size_t>(best), i2)) return 1;

        const std::size_t offset = rng_.index(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            const std::size_t i1 = (k + offset) % n_;
            if (alpha_[i1] > 0.0 && alpha_[i1] < cfg_.c && take_step(i1, i2)) return 1;
        }
        const std::size_t offset2 = rng_.index(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            const std::size_t i1 = (k + offset2) % n_;
            if (take_step(i1, i2)) return 1;
        }
        return 0;
    }

    bool take_step(std::size_t i1, std::size_t i2) {
        if (i1 == i2) return false;
        const double a1 = alpha_[i1];
        const double a2 = alpha_[i2];
        const double y1 = y_[i1];
        const double y2 = y_[i2];
        const double e1 = error_[i1];
        const double e2 = error_[i2];
        const double s = y1 * y2;

        double lo;
        double hi;
        if (s < 0.0) {
            lo = std::max(0.0, a2 - a1);
            hi = std::min(cfg_.c, cfg_.c + a2 - a1);
        } else {
            lo = std::max(0.0, a1 + a2 - cfg_.c);
            hi = std::min(cfg_.c, a1 + a2);
        }
        if (lo >= hi) return false;

        const double k11 = kernel(i1, i1);
        const double k12 = kernel(i1, i2);
        const double k22 = kernel(i2, i2);
        const double eta = k11 + k22 - 2.0 * k12;

        double a2_new;
        if (eta > 0.0) {
            a2_new = std::clamp(a2 + y2 * (e1 - e2) / eta, lo, hi);
        } else {
            // degenerate curvature: evaluate the objective at both clip ends
            const double f1 = y1 * (e1 + b_) - a1 * k11 - s * a2 * k12;
            const double f2 = y2 * (e2 + b_) - s * a1 * k12 - a2 * k22;
            const double l1 = a1 + s * (a2 - lo);
            const double h1 = a1 + s * (a2 - hi);
            const double obj_lo = l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 +
                                  0.5 * lo * lo * k22 + s * lo * l1 * k12;
            const double obj_hi = h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 +
                                  0.5 * hi * hi * k22 + s * hi * h1 * k12;
            if (obj_lo < obj_hi - 1e-12) a2_new = lo;
            else if (obj_lo > obj_hi + 1e-12) a2_new = hi;
            else return false;
        }
        if (std::abs(a2_new - a2) < 1e-7 * (a2_new + a2 + 1e-7)) return false;

        double a1_new = a1 + s * (a2 - a2_new);
        // roundoff guard: land exactly on a bound instead of leaving crumbs
        if (a1_new < 1e-8 * cfg_.c) a1_new = 0.0;
        else if (a1_new > cfg_.c * (1.0 - 1e-8)) a1_new = cfg_.c;

        // bias update keeping a KKT-consistent f on the step's pair
        const double b1 = e1 + y1 * (a1_new - a1) * k11 + y2 * (a2_new - a2) * k12 + b_;
        const double b2 = e2 + y1 * (a1_new - a1) * k12 + y2 * (a2_new - a2) * k22 + b_;
        double b_new;
        if (a1_new > 0.0 && a1_new < cfg_.c) b_new = b1;
        else if (a2_new > 0.0 && a2_new < cfg_.c) b_new = b2;
        else b_new = 0.5 * (b1 + b2);

        const double d1 = y1 * (a1_new - a1);
        const double d2 = y2 * (a2_new - a2);
        for (std::size_t i = 0; i < n_; ++i) {
            error_[i] += d1 * kernel(i1, i) + d2 * kernel(i2, i) - (b_new - b_);
        }
        alpha_[i1] = a1_new;
        alpha_[i2] = a2_new;
        b_ = b_new;
        return true;
    }

    const std::vector<std::vector<double>>& x_;
    const std::vector<double>& y_;
    const SvmConfig& cfg_;
    Rng rng_;
    std::size_t n_;
    std::vector<double> alpha_;
    std::vector<double> error_;  // f(x_i) - y_i
    std::vector<double> kernel_;
    double b_ = 0.0;
};

// Platt probability calibration after Lin, Lu & Weng (2007): Newton descent
// with backtracking on the regularized targets.
std::pair<double, double> platt_calibrate(const std::vector<double>& decision,
                                          const std::vector<double>& y) {
    const std::size_t n = decision.size();
    double prior1 = 0.0;
    for (double v : y) prior1 += v > 0.0 ? 1.0 : 0.0;
    const double prior0 = static_cast<double>(n) - prior1;

    const double hi_target = (prior1 + 1.0) / (prior1 + 2.0);
    const double lo_target = 1.0 / (prior0 + 2.0);
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = y[i] > 0.0 ? hi_target : lo_target;

    double a = 0.0;
    double b = std::log((prior0 + 1.0) / (prior1 + 1.0));

    auto objective = [&](double aa, double bb) {
        double obj = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = aa * decision[i] + bb;
            if (z >= 0.0) {
                obj += t[i] * z + std::log1p(std::exp(-z));
            } else {
                obj += (t[i] - 1.0) * z + std::log1p(std::exp(z));
            }
        }
        return obj;
    };

    double fval = objective(a, b);
    const double min_step = 1e-10;
    const double sigma = 1e-12;
    for (int iter = 0; iter < 100; ++iter) {
        double h11 = sigma;
        double h22 = sigma;
        double h21 = 0.0;
        double g1 = 0.0;
        double g2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z = a * decision[i] + b;
            double p;
            double q;
            if (z >= 0.0) {
                const double e = std::exp(-z);
                p = e / (1.0 + e);
                q = 1.0 / (1.0 + e);
            } else {
                const double e = std::exp(z);
                p = 1.0 / (1.0 + e);
                q = e / (1.0 + e);
            }
            const double d2 = p * q;
            h11 += decision[i] * decision[i] * d2;
            h22 += d2;
            h21 += decision[i] * d2;
            const double d1 = t[i] - p;
            g1 += decision[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;

        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;

        double step = 1.0;
        while (step >= min_step) {
            const double a_new = a + step * da;
            const double b_new = b + step * db;
            const double f_new = objective(a_new, b_new);
            if (f_new < fval + 1e-4 * step * gd) {
                a = a_new;
                b = b_new;
                fval = f_new;
                break;
            }
            step /= 2.0;
        }
        if (step < min_step) break;
    }
    return {a, b};
}

}  // namespace

SvmModel svm_fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                 const SvmConfig& cfg, std::uint64_t seed) {
    if (x.empty() || x.size() != y.size()) {
        throw data_error("svm_fit: inputs and labels must be nonempty and equal in length");
    }
    const std::size_t dim = x.front().size();
    std::vector<double> ypm(x.size());
    std::size_t cases = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].size() != dim) throw data_error("svm_fit: mixed feature lengths");
        ypm[i] = y[i] == 1 ? 1.0 : -1.0;
        cases += static_cast<std::size_t>(y[i] == 1);
    }
    if (cases == 0 || cases == x.size()) {
        throw data_error("svm_fit: both classes required");
    }
    if (cfg.gamma <= 0.0 || cfg.c <= 0.0) {
        throw config_error("svm_fit: gamma and c must be positive");
    }

    SmoSolver solver(x, ypm, cfg, seed);
    const bool converged = solver.solve();

    SvmModel model;
    model.gamma = cfg.gamma;
    model.c = cfg.c;
    model.converged = converged;
    model.bias = solver.bias();

    std::vector<double> train_decision(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) train_decision[i] = solver.decision(i);

    for (std::size_t i = 0; i < x.size(); ++i) {
        if (solver.alpha()[i] > 0.0) {
            model.support_vectors.push_back(x[i]);
            model.alpha_y.push_back(solver.alpha()[i] * ypm[i]);
        }
    }

    if (!converged) {
        double worst = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double margin = ypm[i] * train_decision[i];
            const double a = solver.alpha()[i];
            double residual = 0.0;
            if (a <= 0.0) residual = std::max(0.0, 1.0 - margin);
            else if (a >= cfg.c) residual = std::max(0.0, margin - 1.0);
            else residual = std::abs(margin - 1.0);
            worst = std::max(worst, residual);
        }
        std::fprintf(stderr,
                     "svm_fit: SMO stopped after the sweep budget; worst KKT residual %.3g\n",
                     worst);
    }

    if (cfg.platt) {
        auto [a, b] = platt_calibrate(train_decision, ypm);
        model.platt_a = a;
        model.platt_b = b;
    } else {
        model.platt_a = -1.0;
        model.platt_b = 0.0;
    }
    return model;
}

double svm_decision(const SvmModel& model, const std::vector<double>& x) {
    double f = -model.bias;
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
        f += model.alpha_y[i] * rbf(model.support_vectors[i], x, model.gamma);
    }
    return f;
}

double svm_predict(const SvmModel& model, const std::vector<double>& x) {
    const double z = model.platt_a * svm_decision(model, x) + model.platt_b;
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
}

nlohmann::json SvmModel::to_json() const {
    return {{"support_vectors", support_vectors},
            {"alpha_y", alpha_y},
            {"bias", bias},
            {"gamma", gamma},
            {"c", c},
            {"platt_a", platt_a},
            {"platt_b", platt_b},
            {"converged", converged}};
}

SvmModel SvmModel::from_json(const nlohmann::json& j) {
    SvmModel m;
    m.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
    m.alpha_y = j.at("alpha_y").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.gamma = j.at("gamma").get<double>();
    m.c = j.at("c").get<double>();
    m.platt_a = j.at("platt_a").get<double>();
    m.platt_b = j.at("platt_b").get<double>();
    m.converged = j.at("converged").get<bool>();
    return m;
}

}  // namespace ctg
