#include <cmath>
#include <cstddef>
#include <string>

#include "ctg/baselines.hpp"
#include "ctg/errors.hpp"

namespace ctg {

namespace {

// In-place Cholesky solve of the SPD system A z = b.
std::vector<double> cholesky_solve(std::vector<double> a, std::vector<double> b,
                                   std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
        if (diag <= 0.0 || !std::isfinite(diag)) {
            throw numeric_error("flda_fit: within-class scatter singular after ridge");
        }
        const double l_jj = std::sqrt(diag);
        a[j * n + j] = l_jj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double sum = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) sum -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = sum / l_jj;
        }
    }
    // forward then backward substitution
    for (std::size_t i = 0; i < n; ++i) {
        double sum = b[i];
        for (std::size_t k = 0; k < i; ++k) sum -= a[i * n + k] * b[k];
        b[i] = sum / a[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {
        double sum = b[i];
        for (std::size_t k = i + 1; k < n; ++k) sum -= a[k * n + i] * b[k];
        b[i] = sum / a[i * n + i];
    }
    return b;
}

double project(const std::vector<double>& w, const std::vector<double>& x) {
    double p = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) p += w[i] * x[i];
    return p;
}

}  // namespace

FldaModel flda_fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                   double ridge) {
    if (x.empty() || x.size() != y.size()) {
        throw data_error("flda_fit: inputs and labels must be nonempty and equal in length");
    }
    const std::size_t dim = x.front().size();
    std::size_t n_case = 0;
    std::size_t n_control = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].size() != dim) throw data_error("flda_fit: mixed feature lengths");
        if (y[i] == 1) ++n_case;
        else ++n_control;
    }
    if (n_case == 0 || n_control == 0) {
        throw data_error("flda_fit: both classes required");
    }

    std::vector<double> mu_case(dim, 0.0);
    std::vector<double> mu_control(dim, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto& mu = y[i] == 1 ? mu_case : mu_control;
        for (std::size_t d = 0; d < dim; ++d) mu[d] += x[i][d];
    }
    for (std::size_t d = 0; d < dim; ++d) {
        mu_case[d] /= static_cast<double>(n_case);
        mu_control[d] /= static_cast<double>(n_control);
    }

    // within-class scatter with ridge on the diagonal
    std::vector<double> s_w(dim * dim, 0.0);
    std::vector<double> centered(dim);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto& mu = y[i] == 1 ? mu_case : mu_control;
        for (std::size_t d = 0; d < dim; ++d) centered[d] = x[i][d] - mu[d];
        for (std::size_t a = 0; a < dim; ++a) {
            const double ca = centered[a];
            for (std::size_t b = a; b < dim; ++b) s_w[a * dim + b] += ca * centered[b];
        }
    }
    for (std::size_t a = 0; a < dim; ++a) {
        for (std::size_t b = 0; b < a; ++b) s_w[a * dim + b] = s_w[b * dim + a];
        s_w[a * dim + a] += ridge;
    }

    std::vector<double> diff(dim);
    for (std::size_t d = 0; d < dim; ++d) diff[d] = mu_case[d] - mu_control[d];

    FldaModel model;
    model.w = cholesky_solve(std::move(s_w), std::move(diff), dim);

    double norm = 0.0;
    for (double v : model.w) norm += v * v;
    if (norm == 0.0 || !std::isfinite(norm)) {
        throw numeric_error("flda_fit: degenerate discriminant direction");
    }

    model.mean_case = project(model.w, mu_case);
    model.mean_control = project(model.w, mu_control);
    model.threshold = 0.5 * (model.mean_case + model.mean_control);

    double ss_case = 0.0;
    double ss_control = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double p = project(model.w, x[i]);
        if (y[i] == 1) {
            ss_case += (p - model.mean_case) * (p - model.mean_case);
        } else {
            ss_control += (p - model.mean_control) * (p - model.mean_control);
        }
    }
    model.var_case = n_case > 1 ? ss_case / static_cast<double>(n_case - 1) : 0.0;
    model.var_control =
        n_control > 1 ? ss_control / static_cast<double>(n_control - 1) : 0.0;
    const double pooled =
        (ss_case + ss_control) / std::max<std::size_t>(1, x.size() - 2);
    model.pooled_sd = pooled > 0.0 ? std::sqrt(pooled) : 1.0;
    return model;
}

double flda_predict(const FldaModel& model, const std::vector<double>& x) {
    const double p = project(model.w, x);
    const double gap = model.mean_case - model.mean_control;
    const double z = gap * (p - model.threshold) / (model.pooled_sd * model.pooled_sd);
    // logistic form of the equal-variance Gaussian likelihood ratio
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

nlohmann::json FldaModel::to_json() const {
    return {{"w", w},
            {"threshold", threshold},
            {"mean_case", mean_case},
            {"mean_control", mean_control},
            {"var_case", var_case},
            {"var_control", var_control},
            {"pooled_sd", pooled_sd}};
}

FldaModel FldaModel::from_json(const nlohmann::json& j) {
    FldaModel m;
    m.w = j.at("w").get<std::vector<double>>();
    m.threshold = j.at("threshold").get<double>();
    m.mean_case = j.at("mean_case").get<double>();
    m.mean_control = j.at("mean_control").get<double>();
    m.var_case = j.at("var_case").get<double>();
    m.var_control = j.at("var_control").get<double>();
    m.pooled_sd = j.at("pooled_sd").get<double>();
    return m;
}

}  // namespace ctg
