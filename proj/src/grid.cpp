#include "aet/grid.hpp"

#include <cmath>

namespace aet {

Grid make_grid(int n) {
    if (n < 3) {
        throw GridError("grid needs at least 3 nodes per side, got " + std::to_string(n));
    }
    Grid g;
    g.n = n;
    g.h = 1.0 / static_cast<double>(n - 1);
    return g;
}

Eigen::VectorXd quad_weights(const Grid& g) {
    Eigen::VectorXd w(g.num_nodes());
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            w[g.index(i, j)] = g.quad_weight(i, j);
        }
    }
    return w;
}

namespace {

void require_finite(const Eigen::VectorXd& v, const char* what) {
    if (!v.allFinite()) throw FieldError(std::string(what) + ": non-finite values");
}

void require_finite(const Eigen::VectorXcd& v, const char* what) {
    if (!v.allFinite()) throw FieldError(std::string(what) + ": non-finite values");
}

void require_size(Eigen::Index got, const Grid& g, const char* what) {
    if (got != g.num_nodes()) {
        throw FieldError(std::string(what) + ": expected " + std::to_string(g.num_nodes()) +
                         " values, got " + std::to_string(got));
    }
}

void require_same_grid(const Grid& a, const Grid& b) {
    if (!(a == b)) throw GridError("fields live on different grids");
}

// Derivative along one axis: k is the index along the axis, f(k) reads the value.
// Central inside, one-sided second order at the ends.
template <typename Read>
double axis_derivative(int k, int n, double h, Read f) {
    if (k == 0) return (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h);
    if (k == n - 1) return (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h);
    return (f(k + 1) - f(k - 1)) / (2.0 * h);
}

// Scatter t through the transpose of the 1-D derivative stencil: out += G^T t.
void axis_derivative_transpose(int n, double h, const std::vector<double>& t,
                               std::vector<double>& out) {
    const double s = 1.0 / (2.0 * h);
    out[0] += -3.0 * s * t[0];
    out[1] += 4.0 * s * t[0];
    out[2] += -1.0 * s * t[0];
    for (int k = 1; k < n - 1; ++k) {
        out[k - 1] += -s * t[k];
        out[k + 1] += s * t[k];
    }
    out[n - 1] += 3.0 * s * t[n - 1];
    out[n - 2] += -4.0 * s * t[n - 1];
    out[n - 3] += 1.0 * s * t[n - 1];
}

} // namespace

ScalarField::ScalarField(const Grid& g, Eigen::VectorXd values)
    : grid_(g), values_(std::move(values)) {
    require_size(values_.size(), g, "ScalarField");
    require_finite(values_, "ScalarField");
}

ScalarField ScalarField::constant(const Grid& g, double value) {
    return ScalarField(g, Eigen::VectorXd::Constant(g.num_nodes(), value));
}

ScalarField ScalarField::sample(const Grid& g, const std::function<double(double, double)>& f) {
    Eigen::VectorXd v(g.num_nodes());
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            v[g.index(i, j)] = f(g.x(i), g.y(j));
        }
    }
    return ScalarField(g, std::move(v));
}

ComplexField::ComplexField(const Grid& g, Eigen::VectorXcd values)
    : grid_(g), values_(std::move(values)) {
    require_size(values_.size(), g, "ComplexField");
    require_finite(values_, "ComplexField");
}

ComplexField ComplexField::constant(const Grid& g, std::complex<double> value) {
    return ComplexField(g, Eigen::VectorXcd::Constant(g.num_nodes(), value));
}

ComplexField ComplexField::zero(const Grid& g) { return constant(g, {0.0, 0.0}); }

ComplexField ComplexField::sample(const Grid& g,
                                  const std::function<std::complex<double>(double, double)>& f) {
    Eigen::VectorXcd v(g.num_nodes());
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            v[g.index(i, j)] = f(g.x(i), g.y(j));
        }
    }
    return ComplexField(g, std::move(v));
}

ComplexField ComplexField::from_real(const ScalarField& f) {
    return ComplexField(f.grid(), f.values().cast<std::complex<double>>());
}

ScalarField ComplexField::squared_magnitude() const {
    return ScalarField(grid_, values_.cwiseAbs2());
}

VectorField::VectorField(const Grid& g, Eigen::VectorXd vx, Eigen::VectorXd vy)
    : grid_(g), vx_(std::move(vx)), vy_(std::move(vy)) {
    require_size(vx_.size(), g, "VectorField.vx");
    require_size(vy_.size(), g, "VectorField.vy");
    require_finite(vx_, "VectorField.vx");
    require_finite(vy_, "VectorField.vy");
}

VectorField VectorField::zero(const Grid& g) {
    return VectorField(g, Eigen::VectorXd::Zero(g.num_nodes()),
                       Eigen::VectorXd::Zero(g.num_nodes()));
}

VectorField gradient(const ScalarField& f) {
    const Grid& g = f.grid();
    const int n = g.n;
    Eigen::VectorXd gx(g.num_nodes()), gy(g.num_nodes());
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            gx[g.index(i, j)] =
                axis_derivative(i, n, g.h, [&](int k) { return f(k, j); });
            gy[g.index(i, j)] =
                axis_derivative(j, n, g.h, [&](int k) { return f(i, k); });
        }
    }
    return VectorField(g, std::move(gx), std::move(gy));
}

ScalarField divergence(const VectorField& v) {
    const Grid& g = v.grid();
    const int n = g.n;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(g.num_nodes());

    // x-direction: per row j, out += G^T (w .* Zx Vx)
    std::vector<double> t(n), line(n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const bool normal_face = (i == 0 || i == n - 1);
            t[i] = normal_face ? 0.0 : g.quad_weight(i, j) * v.x(i, j);
        }
        std::fill(line.begin(), line.end(), 0.0);
        axis_derivative_transpose(n, g.h, t, line);
        for (int i = 0; i < n; ++i) acc[g.index(i, j)] += line[i];
    }
    // y-direction: per column i
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const bool normal_face = (j == 0 || j == n - 1);
            t[j] = normal_face ? 0.0 : g.quad_weight(i, j) * v.y(i, j);
        }
        std::fill(line.begin(), line.end(), 0.0);
        axis_derivative_transpose(n, g.h, t, line);
        for (int j = 0; j < n; ++j) acc[g.index(i, j)] += line[j];
    }

    Eigen::VectorXd out(g.num_nodes());
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int k = g.index(i, j);
            out[k] = -acc[k] / g.quad_weight(i, j);
        }
    }
    return ScalarField(g, std::move(out));
}

double inner_l2(const ScalarField& f, const ScalarField& g) {
    require_same_grid(f.grid(), g.grid());
    const Grid& gr = f.grid();
    double acc = 0.0;
    for (int j = 0; j < gr.n; ++j) {
        for (int i = 0; i < gr.n; ++i) {
            acc += gr.quad_weight(i, j) * f(i, j) * g(i, j);
        }
    }
    return acc;
}

std::complex<double> inner_l2(const ComplexField& f, const ComplexField& g) {
    require_same_grid(f.grid(), g.grid());
    const Grid& gr = f.grid();
    std::complex<double> acc = 0.0;
    for (int j = 0; j < gr.n; ++j) {
        for (int i = 0; i < gr.n; ++i) {
            acc += gr.quad_weight(i, j) * f(i, j) * std::conj(g(i, j));
        }
    }
    return acc;
}

double norm_l2(const ScalarField& f) { return std::sqrt(inner_l2(f, f)); }

double norm_l2(const ComplexField& f) { return std::sqrt(std::real(inner_l2(f, f))); }

double norm_h1(const ScalarField& f) {
    const VectorField grad = gradient(f);
    const ScalarField gx(f.grid(), grad.vx());
    const ScalarField gy(f.grid(), grad.vy());
    return std::sqrt(inner_l2(f, f) + inner_l2(gx, gx) + inner_l2(gy, gy));
}

double integral(const ScalarField& f) {
    const Grid& gr = f.grid();
    double acc = 0.0;
    for (int j = 0; j < gr.n; ++j) {
        for (int i = 0; i < gr.n; ++i) acc += gr.quad_weight(i, j) * f(i, j);
    }
    return acc;
}

std::complex<double> integral(const ComplexField& f) {
    const Grid& gr = f.grid();
    std::complex<double> acc = 0.0;
    for (int j = 0; j < gr.n; ++j) {
        for (int i = 0; i < gr.n; ++i) acc += gr.quad_weight(i, j) * f(i, j);
    }
    return acc;
}

ScalarField subtract_mean(const ScalarField& f) {
    const double m = integral(f);
    return ScalarField(f.grid(), f.values().array() - m);
}

} // namespace aet
