#pragma once

// B-spline machinery: model construction (clamped knot vector + roughness
// penalty), pointwise basis/derivative evaluation, and the per-observation
// design rows used by the fitting loop.

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "floc/banded.hpp"
#include "floc/model.hpp"

namespace floc {

struct SplineModel {
    int r;                      // roughness order of the penalty
    int order;                  // spline order, 2r
    int dim;                    // basis size: #unique knots - 2 + order
    double a;                   // domain endpoints
    double b;
    std::vector<double> knots;  // full clamped vector, boundaries repeated `order` times
    BandedMatrix penalty;       // P(k,l) = integral of B_k^(r) B_l^(r), bandwidth order-1
};

using ModelPtr = std::shared_ptr<const SplineModel>;

// Requires r in {1,2,3} and at least two distinct sampling points.
ModelPtr build_model(const DesignSummary& summary, int r);

struct SplineFunction {
    ModelPtr model;
    Eigen::VectorXd coefficients;
};

// Values of the `order` basis functions that are non-zero at t, together with
// derivative rows 1..nderiv. Row s of `ders` holds the s-th derivatives;
// `first` is the global index of the first non-vanishing function.
struct LocalBasis {
    int first = 0;
    Eigen::MatrixXd ders;  // (nderiv+1) x order
};

// t may overshoot [a,b] by at most 1e-9 and is clamped; further out throws
// OutOfDomain. nderiv must be < order.
LocalBasis basis_at(const SplineModel& model, double t, int nderiv = 0);

// Value or derivative of a fitted spline. Uses local coefficient differencing
// rather than the derivative table, so the two routes cross-check each other.
double evaluate(const SplineFunction& f, double t, int deriv = 0);

// Design rows in canonical order: subjects ascending by id, points ascending
// by t. Column c of `vals` holds the non-zero basis values for row c.
struct DesignMatrix {
    int order = 0;
    std::vector<int> first;    // leading basis index per row
    Eigen::MatrixXd vals;      // order x rows
    Eigen::VectorXd y;         // responses
    Eigen::VectorXd d;         // quadrature weight 1/(n m_i) per row
    std::vector<int> subject;  // subject position (0-based) per row
    std::vector<double> t;

    Eigen::Index rows() const { return y.size(); }
};

DesignMatrix design_matrix(const SplineModel& model, const ObservationSet& data);

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace floc
