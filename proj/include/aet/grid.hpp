#pragma once

#include <Eigen/Core>
#include <complex>
#include <functional>

#include "aet/errors.hpp"

namespace aet {

/// Uniform n-by-n node grid on the unit square with spacing h = 1/(n-1).
/// Node (i,j) sits at (i*h, j*h); linear storage index is j*n + i.
struct Grid {
    int n = 0;
    double h = 0.0;

    int num_nodes() const { return n * n; }
    int index(int i, int j) const { return j * n + i; }
    double x(int i) const { return i * h; }
    double y(int j) const { return j * h; }

    bool is_boundary(int i, int j) const {
        return i == 0 || j == 0 || i == n - 1 || j == n - 1;
    }

    /// Trapezoid-rule factor along one axis: 1/2 at the end nodes, 1 inside.
    double edge_factor(int k) const { return (k == 0 || k == n - 1) ? 0.5 : 1.0; }

    /// Area quadrature weight h^2 * c_i * c_j; the weights sum to 1 over the square.
    double quad_weight(int i, int j) const {
        return h * h * edge_factor(i) * edge_factor(j);
    }

    /// Arc-length quadrature weight on the boundary (corners collect h/2 from each
    /// incident face, so every boundary node carries h); zero at interior nodes.
    double boundary_weight(int i, int j) const { return is_boundary(i, j) ? h : 0.0; }

    friend bool operator==(const Grid&, const Grid&) = default;
};

/// n >= 3 nodes per side; throws GridError otherwise.
Grid make_grid(int n);

/// Area quadrature weights as a vector in grid ordering.
Eigen::VectorXd quad_weights(const Grid& g);

class ScalarField {
public:
    ScalarField() = default;
    ScalarField(const Grid& g, Eigen::VectorXd values);

    static ScalarField constant(const Grid& g, double value);
    static ScalarField sample(const Grid& g, const std::function<double(double, double)>& f);

    const Grid& grid() const { return grid_; }
    const Eigen::VectorXd& values() const { return values_; }
    double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
    int size() const { return static_cast<int>(values_.size()); }

private:
    Grid grid_;
    Eigen::VectorXd values_;
};

class ComplexField {
public:
    ComplexField() = default;
    ComplexField(const Grid& g, Eigen::VectorXcd values);

    static ComplexField constant(const Grid& g, std::complex<double> value);
    static ComplexField zero(const Grid& g);
    static ComplexField sample(const Grid& g,
                               const std::function<std::complex<double>(double, double)>& f);
    static ComplexField from_real(const ScalarField& f);

    const Grid& grid() const { return grid_; }
    const Eigen::VectorXcd& values() const { return values_; }
    std::complex<double> operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
    int size() const { return static_cast<int>(values_.size()); }

    /// Pointwise |u|^2 as a real field.
    ScalarField squared_magnitude() const;

private:
    Grid grid_;
    Eigen::VectorXcd values_;
};

class VectorField {
public:
    VectorField() = default;
    VectorField(const Grid& g, Eigen::VectorXd vx, Eigen::VectorXd vy);

    static VectorField zero(const Grid& g);

    const Grid& grid() const { return grid_; }
    const Eigen::VectorXd& vx() const { return vx_; }
    const Eigen::VectorXd& vy() const { return vy_; }
    double x(int i, int j) const { return vx_[grid_.index(i, j)]; }
    double y(int i, int j) const { return vy_[grid_.index(i, j)]; }

private:
    Grid grid_;
    Eigen::VectorXd vx_, vy_;
};

/// Second-order central differences inside, one-sided second-order stencils on the
/// boundary. Exact on affine fields.
VectorField gradient(const ScalarField& f);

/// Negative discrete adjoint of `gradient` under the trapezoid inner product, with
/// the zero-normal-trace convention: normal components of V on the boundary are
/// ignored. The summation-by-parts identity
///     <gradient(f), V> + <f, divergence(V)> = 0
/// holds exactly for every V with zero normal trace. At nodes two or more away
/// from the boundary this reduces to plain central differencing.
ScalarField divergence(const VectorField& v);

/// Trapezoid-weighted inner products; the complex overload is conjugate-linear in
/// the second argument. Grid mismatch throws GridError.
double inner_l2(const ScalarField& f, const ScalarField& g);
std::complex<double> inner_l2(const ComplexField& f, const ComplexField& g);

double norm_l2(const ScalarField& f);
double norm_l2(const ComplexField& f);

/// sqrt(<f,f> + <fx,fx> + <fy,fy>) with the discrete gradient.
double norm_h1(const ScalarField& f);

/// Weighted integral over the unit square (weights sum to 1).
double integral(const ScalarField& f);
std::complex<double> integral(const ComplexField& f);

ScalarField subtract_mean(const ScalarField& f);

} // namespace aet
