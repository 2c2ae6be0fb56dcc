#include "revar/rewhiten.hpp"

#include <Eigen/Eigenvalues>
#include <string>

#include "revar/errors.hpp"

namespace revar {

namespace {

void check_dims(Eigen::Index got, Eigen::Index want, const char* who) {
    if (got != want)
        throw ValidationError(std::string(who) + ": row count " + std::to_string(got) +
                              " does not match model dimension " + std::to_string(want));
}

void fix_column_signs(Eigen::MatrixXd& basis) {
    for (Eigen::Index c = 0; c < basis.cols(); ++c) {
        Eigen::Index imax = 0;
        double amax = -1.0;
        for (Eigen::Index i = 0; i < basis.rows(); ++i) {
            const double a = std::abs(basis(i, c));
            if (a > amax) {
                amax = a;
                imax = i;
            }
        }
        if (basis(imax, c) < 0.0) basis.col(c) = -basis.col(c);
    }
}

}  // namespace

RewhitenModel fit_rewhiten(const Eigen::MatrixXd& resid) {
    const Eigen::Index dim = resid.rows();
    const Eigen::Index n = resid.cols();
    if (n <= dim)
        throw ValidationError("fit_rewhiten: too few residual samples (" + std::to_string(n) +
                              " <= " + std::to_string(dim) + ")");
    if (!resid.allFinite()) throw ValidationError("fit_rewhiten: non-finite residuals");

    // Residuals of the intercept-free regression are treated as zero-mean.
    const Eigen::MatrixXd cov =
        resid * resid.transpose() / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success)
        throw NumericError("fit_rewhiten: eigendecomposition failed");

    RewhitenModel model;
    // Eigen returns ascending order; store descending.
    model.basis = eig.eigenvectors().rowwise().reverse();
    model.eigvals = eig.eigenvalues().reverse();
    if (!(model.eigvals[0] > 0.0))
        throw NumericError("fit_rewhiten: degenerate residual covariance");
    const double floor = 1e-12 * model.eigvals[0];
    model.eigvals = model.eigvals.cwiseMax(floor);
    fix_column_signs(model.basis);
    return model;
}

Eigen::MatrixXd rewhiten(const RewhitenModel& model, const Eigen::MatrixXd& resid) {
    check_dims(resid.rows(), model.dim(), "rewhiten");
    const Eigen::VectorXd inv_scale = model.eigvals.array().sqrt().inverse();
    return inv_scale.asDiagonal() * (model.basis.transpose() * resid);
}

Eigen::MatrixXd colorize(const RewhitenModel& model, const Eigen::MatrixXd& white) {
    check_dims(white.rows(), model.dim(), "colorize");
    const Eigen::VectorXd scale = model.eigvals.array().sqrt();
    return model.basis * (scale.asDiagonal() * white);
}

}  // namespace revar
