#include "revar/fit.hpp"

#include <algorithm>
#include <iostream>

#include "revar/errors.hpp"
#include "revar/preprocess.hpp"
#include "revar/rewhiten.hpp"
#include "revar/synthesis.hpp"
#include "revar/var.hpp"
#include "revar/whitening.hpp"

namespace revar {

ReVarModel fit_revar(const WavefrontSeries& train, const FitOptions& options,
                     FitReport* report) {
    validate_series(train);

    WavefrontSeries conditioned = options.transpose ? transpose_series(train) : train;
    if (options.remove_ttp) conditioned = remove_ttp(conditioned);

    const PixelMatrix px = vectorize(conditioned);

    ReVarModel model;
    model.geom = conditioned.geom;
    model.label = train.label.empty() ? "unnamed" : train.label;
    model.whitening = fit_pca(px.data, options.energy_threshold);

    const Eigen::MatrixXd coeffs = whiten(model.whitening, px.data);
    const int order =
        options.var_order > 0 ? options.var_order : select_order_bic(coeffs, 10);
    model.var = fit_var(coeffs, order);

    StabilityReport stab = is_stable(model.var);
    double rho = 1.0;
    if (!stab.stable) {
        std::cerr << "revar: fitted VAR is unstable (spectral radius "
                  << stab.spectral_radius << "); shrinking coefficients\n";
        rho = stabilize(model.var);
        stab = is_stable(model.var);
    }

    const Eigen::MatrixXd resid = residuals(model.var, coeffs);
    model.rewhiten = fit_rewhiten(resid);

    const int k = options.k_modes < 0 ? std::min(model.rank(), 10)
                                      : std::min(options.k_modes, model.rank());
    model.longrange = fit_mode_spectra(coeffs, k, model.geom.dt, options.welch);

    model.meta.train_frames = train.frame_count;
    model.meta.seed = options.seed;
    model.meta.energy_threshold = options.energy_threshold;
    model.meta.var_order = order;
    model.meta.k_modes = k;
    model.meta.shrink_rho = rho;
    model.meta.spectral_radius = stab.spectral_radius;
    model.meta.config = options.config_echo;

    if (report) {
        report->rank = model.rank();
        report->order = order;
        report->spectral_radius = stab.spectral_radius;
        report->shrink_rho = rho;
        report->k_modes = k;

        const Eigen::MatrixXd white = rewhiten(model.rewhiten, resid);
        const Eigen::Index n = white.cols();
        const Eigen::MatrixXd cov = white * white.transpose() / static_cast<double>(n - 1);
        report->whiteness_cov_dev =
            (cov - Eigen::MatrixXd::Identity(cov.rows(), cov.cols())).cwiseAbs().maxCoeff();
        const Eigen::MatrixXd lag1 = white.rightCols(n - 1) * white.leftCols(n - 1).transpose() /
                                     static_cast<double>(n - 1);
        report->whiteness_lag1 = lag1.cwiseAbs().maxCoeff();

        // Retained spatial energy: kept eigenvalues against total centered
        // variance of the training pixels.
        const Eigen::MatrixXd centered = px.data.colwise() - model.whitening.mu;
        const double total = centered.squaredNorm() / (px.data.cols() - 1);
        report->retained_energy = total > 0.0 ? model.whitening.eigvals.sum() / total : 1.0;
    }
    return model;
}

}  // namespace revar
