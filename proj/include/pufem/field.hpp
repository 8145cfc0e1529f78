#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "pufem/space.hpp"

namespace pufem {

/// Expansion coefficients over a displacement space plus an evaluator for W
/// and its derivatives anywhere on the plate.
class FieldSolution {
public:
    FieldSolution(std::shared_ptr<const DisplacementSpace> space, Eigen::VectorXcd coefficients)
        : space_(std::move(space)), coefficients_(std::move(coefficients)) {
        if (!space_) throw std::invalid_argument("FieldSolution: null space");
        if (static_cast<std::size_t>(coefficients_.size()) != space_->dof_count())
            throw std::invalid_argument("FieldSolution: coefficient count does not match the space");
    }

    const DisplacementSpace& space() const noexcept { return *space_; }
    std::shared_ptr<const DisplacementSpace> space_ptr() const noexcept { return space_; }
    const Eigen::VectorXcd& coefficients() const noexcept { return coefficients_; }

    BasisEval<Complex> evaluate_in_element(int e, LocalPoint p, int order = 0) const {
        const auto dofs = space_->element_dofs(e);
        std::vector<BasisEval<Complex>> buf(dofs.size());
        space_->evaluate(e, p, order, buf);
        BasisEval<Complex> r;
        for (std::size_t i = 0; i < dofs.size(); ++i) {
            const Complex c = coefficients_[static_cast<Eigen::Index>(dofs[i])];
            r.value += c * buf[i].value;
            r.dx += c * buf[i].dx;
            r.dy += c * buf[i].dy;
            r.dxx += c * buf[i].dxx;
            r.dxy += c * buf[i].dxy;
            r.dyy += c * buf[i].dyy;
        }
        return r;
    }

    BasisEval<Complex> evaluate(double x, double y = 0.0, int order = 0) const {
        const int e = space_->mesh().locate(x, y);
        if (e < 0) throw std::out_of_range("FieldSolution: point outside the plate");
        const auto& g = space_->element(e).geometry;
        LocalPoint lp = to_local(g, x, space_->dimension() == 1 ? g.y0 : y);
        lp.xi = std::clamp(lp.xi, -1.0, 1.0);
        lp.eta = space_->dimension() == 1 ? 0.0 : std::clamp(lp.eta, -1.0, 1.0);
        return evaluate_in_element(e, lp, order);
    }

    Complex operator()(double x, double y = 0.0) const { return evaluate(x, y, 0).value; }

    /// out(i, j) = W(xs[i], ys[j])
    Eigen::MatrixXcd evaluate_grid(std::span<const double> xs, std::span<const double> ys) const {
        Eigen::MatrixXcd out(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(ys.size()));
        for (std::size_t j = 0; j < ys.size(); ++j)
            for (std::size_t i = 0; i < xs.size(); ++i)
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*this)(xs[i], ys[j]);
        return out;
    }

private:
    std::shared_ptr<const DisplacementSpace> space_;
    Eigen::VectorXcd coefficients_;
};

}  // namespace pufem
