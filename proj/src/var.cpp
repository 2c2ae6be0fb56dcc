#include "revar/var.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <limits>
#include <string>

#include "revar/errors.hpp"

namespace revar {

namespace {

constexpr double kStabilityMargin = 1e-9;
constexpr double kShrinkTarget = 1.0 - 1e-6;

// Stacked lag design: column t holds [z_{t-1}; z_{t-2}; ...; z_{t-p}]
// for t = p..T-1 (0-based), response column z_t alongside.
void build_design(const Eigen::MatrixXd& z, int order, Eigen::MatrixXd& design,
                  Eigen::MatrixXd& response) {
    const Eigen::Index dim = z.rows();
    const Eigen::Index n = z.cols() - order;
    design.resize(static_cast<Eigen::Index>(order) * dim, n);
    response.resize(dim, n);
    for (Eigen::Index t = 0; t < n; ++t) {
        response.col(t) = z.col(t + order);
        for (int lag = 1; lag <= order; ++lag)
            design.block((lag - 1) * dim, t, dim, 1) = z.col(t + order - lag);
    }
}

Eigen::MatrixXd companion(const VarModel& model) {
    const int dim = model.dim();
    const int order = model.order();
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(order) * dim,
                                                 static_cast<Eigen::Index>(order) * dim);
    for (int i = 0; i < order; ++i)
        comp.block(0, static_cast<Eigen::Index>(i) * dim, dim, dim) = model.coeffs[i];
    if (order > 1)
        comp.block(dim, 0, static_cast<Eigen::Index>(order - 1) * dim,
                   static_cast<Eigen::Index>(order - 1) * dim)
            .setIdentity();
    return comp;
}

}  // namespace

VarModel fit_var(const Eigen::MatrixXd& coeffs_series, int order) {
    const Eigen::Index dim = coeffs_series.rows();
    const Eigen::Index n_frames = coeffs_series.cols();
    if (order < 1) throw ValidationError("fit_var: order must be >= 1");
    if (n_frames <= static_cast<Eigen::Index>(order) * dim + order)
        throw ValidationError("fit_var: insufficient samples (T=" + std::to_string(n_frames) +
                              ", need > p*r + p = " + std::to_string(order * dim + order) + ")");
    if (!coeffs_series.allFinite()) throw ValidationError("fit_var: non-finite input");

    Eigen::MatrixXd design, response;
    build_design(coeffs_series, order, design, response);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.transpose());
    if (qr.rank() < design.rows())
        throw ValidationError("fit_var: collinear lags (design rank " +
                              std::to_string(qr.rank()) + " < " +
                              std::to_string(design.rows()) + ")");
    const Eigen::MatrixXd stacked = qr.solve(response.transpose()).transpose();

    VarModel model;
    model.coeffs.reserve(static_cast<std::size_t>(order));
    for (int i = 0; i < order; ++i)
        model.coeffs.push_back(stacked.middleCols(static_cast<Eigen::Index>(i) * dim, dim));
    return model;
}

Eigen::MatrixXd residuals(const VarModel& model, const Eigen::MatrixXd& coeffs_series) {
    const Eigen::Index dim = coeffs_series.rows();
    const int order = model.order();
    if (dim != model.dim())
        throw ValidationError("residuals: series dimension " + std::to_string(dim) +
                              " does not match model dimension " + std::to_string(model.dim()));
    if (coeffs_series.cols() <= order)
        throw ValidationError("residuals: series shorter than the model order");

    const Eigen::Index n = coeffs_series.cols() - order;
    Eigen::MatrixXd resid = coeffs_series.rightCols(n);
    for (int lag = 1; lag <= order; ++lag)
        resid.noalias() -=
            model.coeffs[lag - 1] * coeffs_series.middleCols(order - lag, n);
    return resid;
}

StabilityReport is_stable(const VarModel& model) {
    const Eigen::MatrixXd comp = companion(model);
    Eigen::EigenSolver<Eigen::MatrixXd> eig(comp, /*computeEigenvectors=*/false);
    StabilityReport rep;
    rep.spectral_radius = eig.eigenvalues().cwiseAbs().maxCoeff();
    rep.stable = rep.spectral_radius < 1.0 - kStabilityMargin;
    return rep;
}

double stabilize(VarModel& model) {
    const StabilityReport rep = is_stable(model);
    if (rep.stable) return 1.0;
    const double rho = kShrinkTarget / rep.spectral_radius;
    double factor = rho;
    for (auto& a : model.coeffs) {
        a *= factor;
        factor *= rho;
    }
    return rho;
}

Eigen::MatrixXd simulate(const VarModel& model, const Eigen::MatrixXd& innovations,
                         const Eigen::MatrixXd& init, int n_keep) {
    const int dim = model.dim();
    const int order = model.order();
    if (innovations.rows() != dim || init.rows() != dim)
        throw ValidationError("simulate: dimension mismatch with model");
    if (init.cols() != order)
        throw ValidationError("simulate: init must supply exactly p states");
    if (n_keep < 1 || innovations.cols() < n_keep)
        throw ValidationError("simulate: innovations shorter than requested output");
    if (!innovations.allFinite() || !init.allFinite())
        throw ValidationError("simulate: non-finite input");

    const StabilityReport rep = is_stable(model);
    if (!rep.stable)
        throw NumericError("simulate: unstable model (spectral radius " +
                           std::to_string(rep.spectral_radius) + "); refit or stabilize first");

    const Eigen::Index n_total = innovations.cols();
    // history holds the p most recent states, newest at column p-1.
    Eigen::MatrixXd history = init;
    Eigen::MatrixXd out(dim, static_cast<Eigen::Index>(n_keep));
    Eigen::VectorXd state(dim);
    const Eigen::Index first_kept = n_total - n_keep;
    for (Eigen::Index t = 0; t < n_total; ++t) {
        state = innovations.col(t);
        for (int lag = 1; lag <= order; ++lag)
            state.noalias() += model.coeffs[lag - 1] * history.col(order - lag);
        if (!state.allFinite())
            throw NumericError("simulate: non-finite state at step " + std::to_string(t));
        if (order > 1)
            history.leftCols(order - 1) = history.rightCols(order - 1).eval();
        history.col(order - 1) = state;
        if (t >= first_kept) out.col(t - first_kept) = state;
    }
    return out;
}

int select_order_bic(const Eigen::MatrixXd& coeffs_series, int max_order) {
    const Eigen::Index dim = coeffs_series.rows();
    int best_order = 0;
    double best_bic = std::numeric_limits<double>::infinity();
    for (int p = 1; p <= max_order; ++p) {
        if (coeffs_series.cols() <= static_cast<Eigen::Index>(p) * dim + p) break;
        VarModel m;
        try {
            m = fit_var(coeffs_series, p);
        } catch (const ValidationError&) {
            continue;
        }
        const Eigen::MatrixXd resid = residuals(m, coeffs_series);
        const double n = static_cast<double>(resid.cols());
        Eigen::MatrixXd sigma = resid * resid.transpose() / n;
        sigma.diagonal().array() += 1e-300;
        const double logdet = sigma.ldlt().vectorD().array().max(1e-300).log().sum();
        const double bic = n * logdet + std::log(n) * static_cast<double>(p) * dim * dim;
        if (bic < best_bic) {
            best_bic = bic;
            best_order = p;
        }
    }
    if (best_order == 0)
        throw ValidationError("select_order_bic: insufficient samples for any candidate order");
    return best_order;
}

}  // namespace revar
