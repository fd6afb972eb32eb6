#pragma once

// Symmetric banded matrices with an LDL^T factorization and the Takahashi
// recursion for the central band of the inverse. The band of the inverse is
// what makes hat-matrix diagonals cheap: each leverage needs only entries of
// M^{-1} within the basis bandwidth.

#include <Eigen/Dense>

namespace floc {

// Lower storage: entry (i, j) with i >= j, i - j <= bandwidth lives at
// band(i - j, j). Off-band entries are identically zero.
class BandedMatrix {
public:
    BandedMatrix(int dim, int bandwidth);

    int dim() const { return dim_; }
    int bandwidth() const { return bw_; }

    double& at(int i, int j);
    double get(int i, int j) const;  // 0 outside the band

    void set_zero() { band_.setZero(); }
    void add_scaled(const BandedMatrix& other, double scale);
    void add_diagonal(double value);
    double trace() const;

    Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
    double quad_form(const Eigen::VectorXd& x) const;  // x' A x
    Eigen::MatrixXd dense() const;

private:
    int dim_;
    int bw_;
    Eigen::MatrixXd band_;  // (bw+1) x dim
};

// LDL^T factorization of a symmetric positive definite banded matrix, with
// symmetric diagonal equilibration applied first. The penalty blocks of the
// fitting systems can be badly graded when knots nearly coincide; the
// equilibration keeps the factorization honest there. Throws SingularSystem
// when a pivot is non-positive or non-finite.
class BandedLdlt {
public:
    explicit BandedLdlt(const BandedMatrix& a);

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

    // Entries of A^{-1} within the original band.
    BandedMatrix inverse_band() const;

private:
    int dim_;
    int bw_;
    Eigen::VectorXd scale_;  // equilibration factors
    Eigen::MatrixXd fact_;   // row 0: D; row d: L(j+d, j)
};

}  // namespace floc
