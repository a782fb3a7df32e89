// types.hpp — Shared scalar/matrix aliases, time grids, and error taxonomy

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qls {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};

// Thrown for malformed inputs: bad shapes, broken structural invariants,
// out-of-range parameters, unparseable scenarios. Maps to CLI exit code 1.
struct ValidationError : std::invalid_argument {
    explicit ValidationError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Thrown when a numerical procedure cannot deliver its contract: evaluation at
// a pole, unstable dynamics where decay is required, solver breakdown.
// Maps to CLI exit code 2.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when independently computed quantities that must agree do not
// (e.g. an output state failing certification far beyond the input's
// tolerance). Maps to CLI exit code 2.
struct ConsistencyError : std::runtime_error {
    explicit ConsistencyError(const std::string& msg) : std::runtime_error(msg) {}
};

// ----------------------------- Uniform time grid -----------------------------

// Uniform sampling t_i = t0 + i*dt, i = 0..size-1. All sampled quantities in
// the library (pulses, kernels, traces) live on one of these.
struct TimeGrid {
    double t0 = 0.0;
    double dt = 1e-3;
    std::size_t size = 0;

    TimeGrid() = default;
    TimeGrid(double t0_, double dt_, std::size_t size_) : t0(t0_), dt(dt_), size(size_) {
        if (!(dt > 0.0)) throw ValidationError("TimeGrid: dt must be positive");
        if (size_ < 2) throw ValidationError("TimeGrid: need at least two samples");
    }

    static TimeGrid from_range(double t_min, double t_max, double dt) {
        if (!(dt > 0.0)) throw ValidationError("TimeGrid: dt must be positive");
        if (!(t_max > t_min)) throw ValidationError("TimeGrid: t_max must exceed t_min");
        const auto n = static_cast<std::size_t>(std::llround((t_max - t_min) / dt)) + 1;
        return TimeGrid(t_min, dt, n);
    }

    double time(std::size_t i) const { return t0 + dt * static_cast<double>(i); }
    double t_end() const { return time(size - 1); }

    // Index of the grid node nearest to t; caller checks range if needed.
    std::ptrdiff_t index_of(double t) const {
        return static_cast<std::ptrdiff_t>(std::llround((t - t0) / dt));
    }

    // Trapezoid weight of node i (dt at interior nodes, dt/2 at the ends).
    double weight(std::size_t i) const {
        return (i == 0 || i + 1 == size) ? 0.5 * dt : dt;
    }

    bool same_as(const TimeGrid& other, double tol = 1e-12) const {
        return size == other.size && std::abs(t0 - other.t0) < tol && std::abs(dt - other.dt) < tol;
    }
};

// Default frequency grid for transfer-function checks: uniform points on
// [-w_max, w_max].
inline std::vector<double> frequency_grid(double w_max = 50.0, std::size_t count = 2001) {
    if (count < 2) throw ValidationError("frequency_grid: need at least two points");
    std::vector<double> w(count);
    const double step = 2.0 * w_max / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) w[i] = -w_max + step * static_cast<double>(i);
    return w;
}

} // namespace qls
