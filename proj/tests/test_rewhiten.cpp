#include <doctest.h>

#include "revar/errors.hpp"
#include "revar/rewhiten.hpp"
#include "revar/synthesis.hpp"
#include "revar/var.hpp"
#include "revar/whitening.hpp"

using namespace revar;

TEST_CASE("white input recovers near-unit eigenvalues") {
    const Eigen::MatrixXd e = generate_noise(4, 30000, 200);
    const RewhitenModel m = fit_rewhiten(e);
    for (int i = 0; i < 4; ++i) CHECK(m.eigvals[i] == doctest::Approx(1.0).epsilon(0.06));
    CHECK((m.basis.transpose() * m.basis - Eigen::MatrixXd::Identity(4, 4))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
}

TEST_CASE("planted diagonal covariance is recovered") {
    Eigen::MatrixXd e = generate_noise(2, 200000, 201);
    e.row(0) *= 2.0;
    const RewhitenModel m = fit_rewhiten(e);
    CHECK(m.eigvals[0] == doctest::Approx(4.0).epsilon(0.05));
    CHECK(m.eigvals[1] == doctest::Approx(1.0).epsilon(0.05));
    CHECK(std::abs(m.basis(0, 0)) > 0.999);
    CHECK(std::abs(m.basis(1, 1)) > 0.999);
}

TEST_CASE("all-zero residuals are degenerate") {
    CHECK_THROWS_WITH_AS(fit_rewhiten(Eigen::MatrixXd::Zero(3, 50)),
                         doctest::Contains("degenerate residual covariance"), NumericError);
}

TEST_CASE("colorize inverts rewhiten") {
    Eigen::MatrixXd e = generate_noise(5, 2000, 202);
    e.row(2) *= 3.0;
    e.row(0) += 0.5 * e.row(4);
    const RewhitenModel m = fit_rewhiten(e);

    const Eigen::MatrixXd back = colorize(m, rewhiten(m, e));
    CHECK((back - e).cwiseAbs().maxCoeff() < 1e-10 * e.cwiseAbs().maxCoeff());
    CHECK(colorize(m, Eigen::MatrixXd::Zero(5, 7)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("training residuals become white") {
    Eigen::MatrixXd e = generate_noise(3, 40000, 203);
    e.row(1) *= 0.2;
    e.row(2) += 0.7 * e.row(0);
    const RewhitenModel m = fit_rewhiten(e);
    const Eigen::MatrixXd w = rewhiten(m, e);
    const Eigen::MatrixXd cov = w * w.transpose() / (w.cols() - 1.0);
    CHECK((cov - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <
          5.0 / std::sqrt(static_cast<double>(w.cols())));
}

TEST_CASE("full analysis chain whitens planted data") {
    // Planted spatial mixing + VAR(1) dynamics, then the full chain:
    // whiten -> VAR residuals -> rewhiten must be white in space and time.
    const int n_frames = 20000;
    const Eigen::MatrixXd mix = (Eigen::MatrixXd(3, 3) << 1.0, 0.4, 0.0, 0.0, 0.7, 0.2, 0.1,
                                 0.0, 0.5).finished();
    VarModel truth;
    truth.coeffs = {(Eigen::MatrixXd(3, 3) << 0.6, 0.1, 0.0, -0.1, 0.5, 0.1, 0.0, -0.1, 0.4)
                        .finished()};
    const Eigen::MatrixXd innov = generate_noise(3, n_frames + 300, 204);
    const Eigen::MatrixXd modes = simulate(truth, innov, Eigen::MatrixXd::Zero(3, 1), n_frames);
    const Eigen::MatrixXd data = mix * modes;

    const WhiteningModel wm = fit_pca(data, 1.0);
    const Eigen::MatrixXd z = whiten(wm, data);
    const VarModel vm = fit_var(z, 1);
    const Eigen::MatrixXd resid = residuals(vm, z);
    const RewhitenModel rm = fit_rewhiten(resid);
    const Eigen::MatrixXd w = rewhiten(rm, resid);

    const Eigen::Index n = w.cols();
    const double bound = 5.0 / std::sqrt(static_cast<double>(n));
    const Eigen::MatrixXd cov = w * w.transpose() / static_cast<double>(n - 1);
    CHECK((cov - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < bound);
    const Eigen::MatrixXd lag1 =
        w.rightCols(n - 1) * w.leftCols(n - 1).transpose() / static_cast<double>(n - 1);
    CHECK(lag1.cwiseAbs().maxCoeff() < bound);
    CHECK(w.rowwise().mean().cwiseAbs().maxCoeff() < 1e-2);
}

TEST_CASE("dimension and sample-count validation") {
    const Eigen::MatrixXd e = generate_noise(4, 100, 205);
    const RewhitenModel m = fit_rewhiten(e);
    CHECK_THROWS_AS(rewhiten(m, generate_noise(3, 10, 1)), ValidationError);
    CHECK_THROWS_AS(colorize(m, generate_noise(5, 10, 1)), ValidationError);
    CHECK_THROWS_AS(fit_rewhiten(generate_noise(4, 4, 1)), ValidationError);
}
