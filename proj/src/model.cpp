#include "revar/model.hpp"

#include "revar/errors.hpp"

namespace revar {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError("model: inconsistent rank (" + what + ")");
}

}  // namespace

void validate_model(const ReVarModel& model) {
    const int r = model.rank();
    if (r < 1) throw ValidationError("model: empty whitening basis");
    require(model.whitening.mu.size() == model.whitening.basis.rows(),
            "mu length vs basis rows");
    require(model.whitening.eigvals.size() == r, "eigvals length vs rank");

    if (model.var.order() < 1) throw ValidationError("model: VAR order must be >= 1");
    for (const auto& a : model.var.coeffs) {
        require(a.rows() == r && a.cols() == r, "VAR coefficient shape vs rank");
        if (!a.allFinite()) throw ValidationError("model: non-finite VAR coefficient");
    }

    require(model.rewhiten.basis.rows() == r && model.rewhiten.basis.cols() == r,
            "rewhitening basis shape vs rank");
    require(model.rewhiten.eigvals.size() == r, "rewhitening eigvals vs rank");

    for (Eigen::Index i = 0; i < r; ++i) {
        if (!(model.whitening.eigvals[i] > 0.0))
            throw ValidationError("model: non-positive whitening eigenvalue");
        if (!(model.rewhiten.eigvals[i] > 0.0))
            throw ValidationError("model: non-positive rewhitening eigenvalue");
    }

    if (model.geom.height < 2 || model.geom.width < 2)
        throw ValidationError("model: grid must be at least 2x2");
    if (!(model.geom.dt > 0.0) || !(model.geom.dx > 0.0))
        throw ValidationError("model: dt and dx must be > 0");
    require(model.geom.mask.size() ==
                static_cast<std::size_t>(model.geom.height) * model.geom.width,
            "mask size vs grid");
    require(static_cast<Eigen::Index>(model.geom.mask_count()) == model.whitening.mu.size(),
            "mask pixel count vs mu length");

    const auto& lr = model.longrange;
    if (!lr.empty()) {
        require(lr.k_modes() <= r, "long-range mode count vs rank");
        require(lr.amps.rows() == lr.freqs.size(), "long-range amps rows vs freqs");
        for (Eigen::Index i = 0; i < lr.freqs.size(); ++i) {
            if (!(lr.freqs[i] > 0.0) || (i > 0 && lr.freqs[i] <= lr.freqs[i - 1]))
                throw ValidationError("model: long-range frequency grid not increasing");
        }
        if ((lr.amps.array() < 0.0).any())
            throw ValidationError("model: negative long-range amplitude");
    }

    // Orthonormality of the stored bases, within round-off of a fresh fit.
    const double dev_w =
        (model.whitening.basis.transpose() * model.whitening.basis -
         Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff();
    const double dev_e =
        (model.rewhiten.basis.transpose() * model.rewhiten.basis -
         Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff();
    if (dev_w > 1e-9 || dev_e > 1e-9)
        throw ValidationError("model: stored basis not orthonormal");
}

}  // namespace revar
