#include "revar/whitening.hpp"

#include <Eigen/SVD>
#include <string>

#include "revar/errors.hpp"

namespace revar {

namespace {

// Deterministic sign convention: flip each column so its largest-magnitude
// entry is positive. First occurrence wins on ties.
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

void check_dims(Eigen::Index got, Eigen::Index want, const char* who) {
    if (got != want)
        throw ValidationError(std::string(who) + ": row count " + std::to_string(got) +
                              " does not match model dimension " + std::to_string(want));
}

}  // namespace

WhiteningModel fit_pca(const Eigen::MatrixXd& data, double energy_threshold) {
    const Eigen::Index n_px = data.rows();
    const Eigen::Index n_frames = data.cols();
    if (n_frames < 2) throw ValidationError("fit_pca: need at least 2 frames");
    if (!(energy_threshold > 0.0) || energy_threshold > 1.0)
        throw ValidationError("fit_pca: energy threshold must be in (0, 1]");
    if (!data.allFinite()) throw ValidationError("fit_pca: non-finite input");

    WhiteningModel model;
    model.mu = data.rowwise().mean();
    Eigen::MatrixXd centered = data.colwise() - model.mu;

    // All-constant data leaves nothing to decompose.
    const double centered_sq = centered.squaredNorm();
    if (centered_sq <= 1e-24 * data.squaredNorm())
        throw NumericError("fit_pca: degenerate covariance (no variance in input)");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU);
    const Eigen::VectorXd& sing = svd.singularValues();
    Eigen::VectorXd all_eigvals =
        sing.array().square() / static_cast<double>(n_frames - 1);

    // Smallest rank reaching the energy threshold; modes below the
    // eigenvalue floor are dropped regardless.
    const double total = all_eigvals.sum();
    const double floor = 1e-12 * all_eigvals[0];
    const Eigen::Index max_rank = std::min(n_px, n_frames - 1);
    Eigen::Index rank = 0;
    double acc = 0.0;
    while (rank < max_rank && all_eigvals[rank] >= floor) {
        acc += all_eigvals[rank];
        ++rank;
        if (acc >= energy_threshold * total) break;
    }
    if (rank == 0) throw NumericError("fit_pca: degenerate covariance (no variance in input)");

    model.basis = svd.matrixU().leftCols(rank);
    model.eigvals = all_eigvals.head(rank);
    fix_column_signs(model.basis);
    return model;
}

Eigen::MatrixXd whiten(const WhiteningModel& model, const Eigen::MatrixXd& data) {
    check_dims(data.rows(), model.pixel_dim(), "whiten");
    const Eigen::VectorXd inv_scale = model.eigvals.array().sqrt().inverse();
    return inv_scale.asDiagonal() *
           (model.basis.transpose() * (data.colwise() - model.mu));
}

Eigen::MatrixXd unwhiten(const WhiteningModel& model, const Eigen::MatrixXd& coeffs) {
    check_dims(coeffs.rows(), model.rank(), "unwhiten");
    const Eigen::VectorXd scale = model.eigvals.array().sqrt();
    return (model.basis * (scale.asDiagonal() * coeffs)).colwise() + model.mu;
}

}  // namespace revar
