#include "floc/basis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "floc/errors.hpp"

namespace floc {

namespace {

constexpr double kDomainTol = 1e-9;

int find_span(const SplineModel& m, double& t) {
    if (t < m.a - kDomainTol || t > m.b + kDomainTol)
        throw OutOfDomain("t=" + std::to_string(t) + " outside fitted domain [" +
                          std::to_string(m.a) + ", " + std::to_string(m.b) + "]");
    t = std::clamp(t, m.a, m.b);
    const int p = m.order - 1;
    const int hi = static_cast<int>(m.knots.size()) - 1 - p;  // knots[hi] == b
    if (t >= m.knots[hi]) return hi - 1;
    auto it = std::upper_bound(m.knots.begin() + p, m.knots.begin() + hi, t);
    return static_cast<int>(it - m.knots.begin()) - 1;
}

// Basis values and derivatives at t for the span's non-vanishing functions.
// Standard two-table recurrence over the knot differences.
void ders_basis(const std::vector<double>& U, int span, double t, int p, int nd,
                Eigen::MatrixXd& out) {
    Eigen::MatrixXd ndu(p + 1, p + 1);
    std::vector<double> left(p + 1), right(p + 1);
    ndu(0, 0) = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = t - U[span + 1 - j];
        right[j] = U[span + j] - t;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu(j, r) = right[r + 1] + left[j - r];
            const double temp = ndu(r, j - 1) / ndu(j, r);
            ndu(r, j) = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu(j, j) = saved;
    }

    out.setZero(nd + 1, p + 1);
    for (int j = 0; j <= p; ++j) out(0, j) = ndu(j, p);

    const int kmax = std::min(nd, p);
    Eigen::MatrixXd a(2, p + 1);
    for (int r = 0; r <= p; ++r) {
        int s1 = 0, s2 = 1;
        a(0, 0) = 1.0;
        for (int k = 1; k <= kmax; ++k) {
            double dsum = 0.0;
            const int rk = r - k;
            const int pk = p - k;
            if (r >= k) {
                a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
                dsum = a(s2, 0) * ndu(rk, pk);
            }
            const int j1 = (rk >= -1) ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
                dsum += a(s2, j) * ndu(rk + j, pk);
            }
            if (r <= pk) {
                a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
                dsum += a(s2, k) * ndu(r, pk);
            }
            out(k, r) = dsum;
            std::swap(s1, s2);
        }
    }

    double factor = p;
    for (int k = 1; k <= kmax; ++k) {
        for (int j = 0; j <= p; ++j) out(k, j) *= factor;
        factor *= p - k;
    }
}

}  // namespace

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw ConfigError("quadrature rule needs at least one node");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            // p0 = P_n(z); derivative from the standard identity
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
}

ModelPtr build_model(const DesignSummary& summary, int r) {
    if (r < 1 || r > 3)
        throw InvalidTuning("penalty order r must be 1, 2, or 3 (got " +
                            std::to_string(r) + ")");
    const auto& uk = summary.unique_knots;
    if (uk.size() < 2)
        throw TooFewPoints("need at least 2 distinct sampling points, got " +
                           std::to_string(uk.size()));

    const int order = 2 * r;
    const int dim = static_cast<int>(uk.size()) - 2 + order;

    std::vector<double> knots;
    knots.reserve(uk.size() - 2 + 2 * order);
    for (int i = 0; i < order; ++i) knots.push_back(uk.front());
    knots.insert(knots.end(), uk.begin() + 1, uk.end() - 1);
    for (int i = 0; i < order; ++i) knots.push_back(uk.back());

    // penalty by Gauss-Legendre per knot interval; r+1 nodes are exact for
    // the degree-(2r-2) integrand
    BandedMatrix P(dim, order - 1);
    std::vector<double> gx, gw;
    gauss_legendre(r + 1, gx, gw);
    Eigen::MatrixXd ders;
    for (std::size_t i = order - 1; i + order < knots.size(); ++i) {
        const double lo = knots[i], hi = knots[i + 1];
        if (!(hi > lo)) continue;
        const double mid = 0.5 * (lo + hi), halfw = 0.5 * (hi - lo);
        for (std::size_t q = 0; q < gx.size(); ++q) {
            const double x = mid + halfw * gx[q];
            const double w = halfw * gw[q];
            ders_basis(knots, static_cast<int>(i), x, order - 1, r, ders);
            const int first = static_cast<int>(i) - order + 1;
            for (int c = 0; c < order; ++c)
                for (int cc = 0; cc <= c; ++cc)
                    P.at(first + c, first + cc) += w * ders(r, c) * ders(r, cc);
        }
    }

    return std::make_shared<SplineModel>(SplineModel{
        r, order, dim, uk.front(), uk.back(), std::move(knots), std::move(P)});
}

LocalBasis basis_at(const SplineModel& model, double t, int nderiv) {
    if (nderiv < 0 || nderiv >= model.order)
        throw OutOfDomain("derivative order " + std::to_string(nderiv) +
                          " outside [0, " + std::to_string(model.order) + ")");
    double tt = t;
    const int span = find_span(model, tt);
    LocalBasis out;
    out.first = span - model.order + 1;
    ders_basis(model.knots, span, tt, model.order - 1, nderiv, out.ders);
    return out;
}

double evaluate(const SplineFunction& f, double t, int deriv) {
    const SplineModel& m = *f.model;
    if (f.coefficients.size() != m.dim)
        throw ConfigError("coefficient vector does not match model dimension");
    if (deriv < 0 || deriv >= m.order)
        throw OutOfDomain("derivative order " + std::to_string(deriv) +
                          " outside [0, " + std::to_string(m.order) + ")");

    double tt = t;
    const int span = find_span(m, tt);
    const int p = m.order - 1;
    const auto& U = m.knots;

    // local copy of the coefficients feeding this span
    std::vector<double> c(m.order);
    for (int j = 0; j <= p; ++j) c[j] = f.coefficients[span - p + j];

    // repeated differencing: after k rounds, entries k..p are the control
    // values of the (k-th derivative) spline of order (order-k)
    for (int k = 1; k <= deriv; ++k) {
        for (int j = p; j >= k; --j) {
            const double den = U[span - p + j + p - k + 1] - U[span - p + j];
            c[j] = (p - k + 1) * (c[j] - c[j - 1]) / den;
        }
    }

    // Cox-de Boor for the reduced order q = order - deriv at the same span
    const int q = m.order - deriv;
    std::vector<double> N(q), left(q), right(q);
    N[0] = 1.0;
    for (int j = 1; j < q; ++j) {
        left[j] = tt - U[span + 1 - j];
        right[j] = U[span + j] - tt;
        double saved = 0.0;
        for (int rr = 0; rr < j; ++rr) {
            const double temp = N[rr] / (right[rr + 1] + left[j - rr]);
            N[rr] = saved + right[rr + 1] * temp;
            saved = left[j - rr] * temp;
        }
        N[j] = saved;
    }

    double value = 0.0;
    for (int j = 0; j < q; ++j) value += N[j] * c[deriv + j];
    return value;
}

DesignMatrix design_matrix(const SplineModel& model, const ObservationSet& data) {
    DesignMatrix dm;
    dm.order = model.order;
    const std::size_t rows = data.total_points();
    dm.first.resize(rows);
    dm.vals.resize(model.order, static_cast<Eigen::Index>(rows));
    dm.y.resize(rows);
    dm.d.resize(rows);
    dm.subject.resize(rows);
    dm.t.resize(rows);

    const double n = static_cast<double>(data.n());
    std::size_t row = 0;
    int si = 0;
    for (const auto& s : data.subjects()) {
        const double dweight = 1.0 / (n * static_cast<double>(s.t.size()));
        for (std::size_t j = 0; j < s.t.size(); ++j, ++row) {
            const LocalBasis lb = basis_at(model, s.t[j], 0);
            dm.first[row] = lb.first;
            dm.vals.col(row) = lb.ders.row(0).transpose();
            dm.y[row] = s.y[j];
            dm.d[row] = dweight;
            dm.subject[row] = si;
            dm.t[row] = s.t[j];
        }
        ++si;
    }
    return dm;
}

}  // namespace floc
