// fields.cpp — Pulse shapes, covariance kernels, and the perfect-matching
// normalization engine for photon–Gaussian field states.

#include "qls/fields.hpp"
#include "qls/dmat.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qls::fields {

namespace {

// Trapezoid weight for node k of a node list with spacing `step`.
double trap_weight(std::size_t k, std::size_t count, double step) {
    if (count < 2) return 0.0;
    return (k == 0 || k + 1 == count) ? 0.5 * step : step;
}

// Unconjugated dot product Σ x_c · y_c.
Complex dot_t(const Complex* x, const Complex* y, Index d) {
    Complex s{0.0, 0.0};
    for (Index c = 0; c < d; ++c) s += x[c] * y[c];
    return s;
}

// Conjugated dot product Σ conj(x_c) · y_c.
Complex dot_c(const Complex* x, const Complex* y, Index d) {
    Complex s{0.0, 0.0};
    for (Index c = 0; c < d; ++c) s += std::conj(x[c]) * y[c];
    return s;
}

} // namespace

// ------------------------------ Pulse shapes ---------------------------------

PulseFn exponential_pulse(double gamma, double t_start) {
    if (!(gamma > 0.0))
        throw ValidationError("Pulse: exponential decay rate must be positive, got " +
                              std::to_string(gamma));
    const double amp = std::sqrt(2.0 * gamma);
    return [gamma, t_start, amp](double t) -> Complex {
        const double s = t - t_start;
        return s >= 0.0 ? Complex{amp * std::exp(-gamma * s), 0.0} : Complex{0.0, 0.0};
    };
}

PulseFn rational_pulse(const std::vector<Complex>& coeff, const std::vector<Complex>& pole) {
    if (coeff.empty() || coeff.size() != pole.size())
        throw ValidationError("Pulse: coefficient and pole lists must be non-empty and equal length");
    for (const Complex& p : pole)
        if (p.real() >= 0.0) {
            std::ostringstream os;
            os << "Pulse: pole " << p.real() << (p.imag() < 0 ? "-" : "+")
               << std::abs(p.imag()) << "i is not in the open left half plane";
            throw ValidationError(os.str());
        }
    return [coeff, pole](double t) -> Complex {
        if (t < 0.0) return {0.0, 0.0};
        Complex v{0.0, 0.0};
        for (std::size_t k = 0; k < coeff.size(); ++k)
            v += coeff[k] * std::exp(pole[k] * t);
        return v;
    };
}

PulseFn sampled_pulse(const TimeGrid& grid, std::vector<Complex> values) {
    if (values.size() != grid.size)
        throw ValidationError("Pulse: sample count " + std::to_string(values.size()) +
                              " does not match grid size " + std::to_string(grid.size));
    return [grid, values = std::move(values)](double t) -> Complex {
        const double x = (t - grid.t0) / grid.dt;
        if (x < -1e-9 || x > static_cast<double>(grid.size - 1) + 1e-9) return {0.0, 0.0};
        const double xl = std::clamp(x, 0.0, static_cast<double>(grid.size - 1));
        const auto i0 = static_cast<std::size_t>(std::floor(xl));
        const std::size_t i1 = std::min(i0 + 1, grid.size - 1);
        const double f = xl - static_cast<double>(i0);
        return (1.0 - f) * values[i0] + f * values[i1];
    };
}

namespace {

// Trapezoid over the sample support [first nonzero, last nonzero]: a pulse
// switching on or off exactly at a node contributes no phantom half-cell
// outside its support. Cells wholly outside contribute zero regardless.
double clipped_trapezoid(const std::vector<double>& v, double dt) {
    std::size_t lo = v.size(), hi = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] != 0.0) {
            if (lo == v.size()) lo = i;
            hi = i;
        }
    if (lo >= hi) return 0.0;
    double s = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) s += v[i];
    s -= 0.5 * (v[lo] + v[hi]);
    return s * dt;
}

} // namespace

double pulse_norm_sq(const PulseFn& nu, const TimeGrid& grid) {
    std::vector<double> v(grid.size);
    for (std::size_t i = 0; i < grid.size; ++i) v[i] = std::norm(nu(grid.time(i)));
    return clipped_trapezoid(v, grid.dt);
}

Complex pulse_overlap(const PulseFn& nu1, const PulseFn& nu2, const TimeGrid& grid) {
    std::vector<Complex> v(grid.size);
    std::size_t lo = grid.size, hi = 0;
    for (std::size_t i = 0; i < grid.size; ++i) {
        const double t = grid.time(i);
        v[i] = std::conj(nu1(t)) * nu2(t);
        if (v[i] != Complex{0.0, 0.0}) {
            if (lo == grid.size) lo = i;
            hi = i;
        }
    }
    if (lo >= hi) return Complex{0.0, 0.0};
    Complex s{0.0, 0.0};
    for (std::size_t i = lo; i <= hi; ++i) s += v[i];
    s -= 0.5 * (v[lo] + v[hi]);
    return s * grid.dt;
}

// ------------------------------ Pulse matrix ---------------------------------

Matrix PulseMatrix::minus_at(double t) const {
    if (eval_minus) return eval_minus(t);
    const double x = (t - grid.t0) / grid.dt;
    if (x < -1e-9 || x > static_cast<double>(grid.size - 1) + 1e-9)
        return Matrix::Zero(n_ch, n_ch);
    const double xl = std::clamp(x, 0.0, static_cast<double>(grid.size - 1));
    const auto i0 = static_cast<std::size_t>(std::floor(xl));
    const std::size_t i1 = std::min(i0 + 1, grid.size - 1);
    const double f = xl - static_cast<double>(i0);
    return (1.0 - f) * xi_minus[i0] + f * xi_minus[i1];
}

Matrix PulseMatrix::plus_at(double t) const {
    if (eval_plus) return eval_plus(t);
    const double x = (t - grid.t0) / grid.dt;
    if (x < -1e-9 || x > static_cast<double>(grid.size - 1) + 1e-9)
        return Matrix::Zero(n_ch, n_ch);
    const double xl = std::clamp(x, 0.0, static_cast<double>(grid.size - 1));
    const auto i0 = static_cast<std::size_t>(std::floor(xl));
    const std::size_t i1 = std::min(i0 + 1, grid.size - 1);
    const double f = xl - static_cast<double>(i0);
    return (1.0 - f) * xi_plus[i0] + f * xi_plus[i1];
}

Vector PulseMatrix::column(std::size_t i, Index k) const {
    const Index m = n_ch;
    Vector v(2 * m);
    if (k < m) {
        v.head(m) = xi_minus[i].col(k);
        v.tail(m) = xi_plus[i].col(k).conjugate();
    } else if (k < 2 * m) {
        v.head(m) = xi_plus[i].col(k - m);
        v.tail(m) = xi_minus[i].col(k - m).conjugate();
    } else {
        throw ValidationError("PulseMatrix: column index " + std::to_string(k) +
                              " out of range for " + std::to_string(2 * m) + " columns");
    }
    return v;
}

double PulseMatrix::column_norm_sq(Index k) const {
    std::vector<double> v(grid.size);
    for (std::size_t i = 0; i < grid.size; ++i) v[i] = column(i, k).squaredNorm();
    return clipped_trapezoid(v, grid.dt);
}

PulseMatrix PulseMatrix::phase_rotated(double theta) const {
    const Complex ph = std::exp(kI * theta);
    PulseMatrix out = *this;
    for (std::size_t i = 0; i < grid.size; ++i) {
        out.xi_minus[i] *= ph;
        out.xi_plus[i] *= std::conj(ph);
    }
    if (eval_minus) out.eval_minus = [f = eval_minus, ph](double t) { return Matrix(ph * f(t)); };
    if (eval_plus) out.eval_plus = [f = eval_plus, ph](double t) { return Matrix(std::conj(ph) * f(t)); };
    return out;
}

PulseMatrix PulseMatrix::scaled(Complex factor) const {
    PulseMatrix out = *this;
    for (std::size_t i = 0; i < grid.size; ++i) {
        out.xi_minus[i] *= factor;
        out.xi_plus[i] *= factor;
    }
    if (eval_minus) out.eval_minus = [f = eval_minus, factor](double t) { return Matrix(factor * f(t)); };
    if (eval_plus) out.eval_plus = [f = eval_plus, factor](double t) { return Matrix(factor * f(t)); };
    return out;
}

// ------------------------------------------------------------------------------

PulseMatrix photon_pulses(const TimeGrid& grid, const std::vector<PulseFn>& nu,
                          double norm_tol) {
    if (nu.empty()) throw ValidationError("Pulses: need at least one channel pulse");
    const Index m = static_cast<Index>(nu.size());

    std::vector<double> norms(nu.size());
    bool ok = true;
    for (std::size_t k = 0; k < nu.size(); ++k) {
        norms[k] = pulse_norm_sq(nu[k], grid);
        if (std::abs(norms[k] - 1.0) > norm_tol) ok = false;
    }
    if (!ok) {
        std::ostringstream os;
        os << "Pulses: unit-norm check failed (tolerance " << norm_tol << "); squared norms:";
        for (std::size_t k = 0; k < norms.size(); ++k)
            os << " channel " << (k + 1) << " = " << norms[k] << (k + 1 < norms.size() ? "," : "");
        throw ValidationError(os.str());
    }

    auto eval = [m, nu](double t) {
        Matrix x = Matrix::Zero(m, m);
        for (Index k = 0; k < m; ++k) x(k, k) = nu[static_cast<std::size_t>(k)](t);
        return x;
    };
    return make_pulse_matrix(grid, m, eval, nullptr);
}

PulseMatrix make_pulse_matrix(const TimeGrid& grid, Index n_ch,
                              const std::function<Matrix(double)>& eval_minus,
                              const std::function<Matrix(double)>& eval_plus) {
    if (n_ch <= 0) throw ValidationError("Pulses: channel count must be positive");
    PulseMatrix xi;
    xi.grid = grid;
    xi.n_ch = n_ch;
    xi.xi_minus.reserve(grid.size);
    xi.xi_plus.reserve(grid.size);
    for (std::size_t i = 0; i < grid.size; ++i) {
        const double t = grid.time(i);
        Matrix xm = eval_minus ? eval_minus(t) : Matrix::Zero(n_ch, n_ch);
        Matrix xp = eval_plus ? eval_plus(t) : Matrix::Zero(n_ch, n_ch);
        if (xm.rows() != n_ch || xm.cols() != n_ch || xp.rows() != n_ch || xp.cols() != n_ch)
            throw ValidationError("Pulses: block evaluator returned a block of the wrong shape");
        xi.xi_minus.push_back(std::move(xm));
        xi.xi_plus.push_back(std::move(xp));
    }
    xi.eval_minus = eval_minus;
    xi.eval_plus = eval_plus;
    return xi;
}

// --------------------------- Covariance kernels ------------------------------

Matrix CovKernel::background_at(double tau) const {
    if (background) return background(tau);
    return Matrix::Zero(2 * n_ch, 2 * n_ch);
}

Matrix CovKernel::smooth(double t, double r) const {
    Matrix v = background_at(t - r);
    for (const SeparableTerm& term : separable)
        v += term.left(t) * term.right(r).adjoint();
    if (general) v += general(t, r);
    return v;
}

CovKernel vacuum_cov(Index m) {
    if (m <= 0) throw ValidationError("Covariance: channel count must be positive");
    CovKernel R;
    R.n_ch = m;
    R.delta_coeff = Matrix::Zero(2 * m, 2 * m);
    R.delta_coeff.topLeftCorner(m, m) = Matrix::Identity(m, m);
    return R;
}

CovKernel photon_cov(const PulseMatrix& xi, CovKernel background) {
    if (background.n_ch != xi.n_ch)
        throw ValidationError("Covariance: pulse matrix and background kernel channel counts differ");
    const Index m = xi.n_ch;
    for (Index k = 0; k < 2 * m; ++k) {
        SeparableTerm term;
        auto col = [xi, k](double t) -> Vector {
            const Matrix xm = xi.minus_at(t);
            const Matrix xp = xi.plus_at(t);
            const Index mm = xi.n_ch;
            Vector v(2 * mm);
            if (k < mm) {
                v.head(mm) = xm.col(k);
                v.tail(mm) = xp.col(k).conjugate();
            } else {
                v.head(mm) = xp.col(k - mm);
                v.tail(mm) = xm.col(k - mm).conjugate();
            }
            return v;
        };
        term.left = col;
        term.right = col;
        background.separable.push_back(std::move(term));
    }
    return background;
}

CovKernel photon_input_cov(const PulseMatrix& xi) {
    return photon_cov(xi, vacuum_cov(xi.n_ch));
}

CovKernel coherent_channel2_cov(const PulseFn& alpha) {
    if (!alpha) throw ValidationError("Covariance: coherent amplitude function is empty");
    CovKernel R = vacuum_cov(2);
    SeparableTerm term;
    auto mean = [alpha](double t) -> Vector {
        Vector v = Vector::Zero(4);
        const Complex a = alpha(t);
        v(1) = a;
        v(3) = std::conj(a);
        return v;
    };
    term.left = mean;
    term.right = mean;
    R.separable.push_back(std::move(term));
    return R;
}

double kernel_hermitian_residual(const CovKernel& R, const TimeGrid& grid, std::size_t stride) {
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size; i += stride)
        for (std::size_t j = 0; j <= i; j += stride) {
            const Matrix a = R.smooth(grid.time(i), grid.time(j));
            const Matrix b = R.smooth(grid.time(j), grid.time(i));
            worst = std::max(worst, (a - b.adjoint()).cwiseAbs().maxCoeff());
        }
    return worst;
}

// ------------------------------ Normalization --------------------------------

namespace {

// Enumerate perfect matchings of {0..2j−1}: pair the smallest open slot with
// every later open slot, recurse, and accumulate Π pair_value.
void matching_sum(const std::vector<std::vector<Complex>>& pair_value,
                  std::vector<bool>& used, Complex prod, Complex& total, int& count) {
    const std::size_t n = used.size();
    std::size_t first = n;
    for (std::size_t p = 0; p < n; ++p)
        if (!used[p]) { first = p; break; }
    if (first == n) {
        total += prod;
        ++count;
        return;
    }
    used[first] = true;
    for (std::size_t q = first + 1; q < n; ++q) {
        if (used[q]) continue;
        used[q] = true;
        matching_sum(pair_value, used, prod * pair_value[first][q], total, count);
        used[q] = false;
    }
    used[first] = false;
}

// All slot/kernel data flattened over the active support window.
struct PairEngine {
    Index d = 0;             // 2m
    std::size_t win = 0;     // window length
    double dt = 0.0;
    std::vector<double> times;                 // window node times
    std::vector<std::vector<Complex>> u;       // slot samples, [slot][i*d+c]
    std::vector<std::vector<Complex>> pu;      // P·u
    std::vector<std::vector<Complex>> dpu;     // D·P·u
    std::vector<Complex> lag;                  // background K(k·dt), k=−(win−1)..win−1, [(k+win−1)*d*d + a*d+b]
    bool has_bg = false;
    // Per separable term: sampled L(t_i) and R(t_i) (flattened like u).
    std::vector<std::vector<Complex>> sep_left, sep_right;
    std::function<Matrix(double, double)> general;

    Complex pair_integral(std::size_t p, std::size_t q, std::size_t stride) const {
        // Node list i = 0, stride, 2·stride, … with trapezoid weights at
        // spacing stride·dt.
        std::vector<std::size_t> nodes;
        for (std::size_t i = 0; i < win; i += stride) nodes.push_back(i);
        const std::size_t nn = nodes.size();
        if (nn < 2) return {0.0, 0.0};
        const double step = static_cast<double>(stride) * dt;

        Complex acc{0.0, 0.0};

        // Delta part: ∫ u_pᵀ (D P) u_q dt.
        for (std::size_t k = 0; k < nn; ++k) {
            const std::size_t i = nodes[k];
            acc += trap_weight(k, nn, step) * dot_t(&u[p][i * d], &dpu[q][i * d], d);
        }

        // Stationary background: ∬ u_p(t)ᵀ K(t−r) (P u_q)(r) dt dr.
        if (has_bg) {
            const std::size_t dd = static_cast<std::size_t>(d) * static_cast<std::size_t>(d);
            Complex bg{0.0, 0.0};
            for (std::size_t a = 0; a < nn; ++a) {
                const std::size_t ia = nodes[a];
                const Complex* up = &u[p][ia * d];
                const double wa = trap_weight(a, nn, step);
                Complex row{0.0, 0.0};
                for (std::size_t b = 0; b < nn; ++b) {
                    const std::size_t ib = nodes[b];
                    const Complex* wq = &pu[q][ib * d];
                    const auto koff = static_cast<std::size_t>(
                        static_cast<std::ptrdiff_t>(ia) - static_cast<std::ptrdiff_t>(ib) +
                        static_cast<std::ptrdiff_t>(win) - 1);
                    const Complex* K = &lag[koff * dd];
                    Complex v{0.0, 0.0};
                    for (Index r = 0; r < d; ++r) {
                        Complex rowv{0.0, 0.0};
                        for (Index c = 0; c < d; ++c) rowv += K[r * d + c] * wq[c];
                        v += up[r] * rowv;
                    }
                    row += trap_weight(b, nn, step) * v;
                }
                bg += wa * row;
            }
            acc += bg;
        }

        // Separable terms factorize: (∫ u_pᵀ L)(∫ R† (P u_q)).
        for (std::size_t s = 0; s < sep_left.size(); ++s) {
            Complex a{0.0, 0.0}, b{0.0, 0.0};
            for (std::size_t k = 0; k < nn; ++k) {
                const std::size_t i = nodes[k];
                const double w = trap_weight(k, nn, step);
                a += w * dot_t(&u[p][i * d], &sep_left[s][i * d], d);
                b += w * dot_c(&sep_right[s][i * d], &pu[q][i * d], d);
            }
            acc += a * b;
        }

        // Arbitrary non-stationary remainder (slow path).
        if (general) {
            Complex g{0.0, 0.0};
            Vector wq(d);
            for (std::size_t a = 0; a < nn; ++a) {
                const std::size_t ia = nodes[a];
                Eigen::Map<const Vector> up(&u[p][ia * d], d);
                const double wa = trap_weight(a, nn, step);
                for (std::size_t b = 0; b < nn; ++b) {
                    const std::size_t ib = nodes[b];
                    for (Index c = 0; c < d; ++c) wq(c) = pu[q][ib * d + c];
                    g += wa * trap_weight(b, nn, step) *
                         (up.transpose() * general(times[ia], times[ib]) * wq).value();
                }
            }
            acc += g;
        }

        return acc;
    }
};

} // namespace

NormalizationResult normalization(const PulseMatrix& xi, const CovKernel& R,
                                  const std::vector<Index>& photons, double tol) {
    const Index m = xi.n_ch;
    if (R.n_ch != m)
        throw ValidationError("Normalization: pulse matrix and kernel channel counts differ");
    if (photons.empty())
        throw ValidationError("Normalization: need at least one photon column");
    if (photons.size() > 4)
        throw ValidationError("Normalization: " + std::to_string(photons.size()) +
                              " photon columns requested; the matching sum grows as (2j-1)!! "
                              "and products beyond 4 are not supported");
    for (std::size_t k = 0; k < photons.size(); ++k) {
        if (photons[k] < 0 || photons[k] >= m)
            throw ValidationError("Normalization: photon column index out of range");
        if (k > 0 && photons[k] <= photons[k - 1])
            throw ValidationError("Normalization: photon columns must be strictly ascending");
    }

    const std::size_t j = photons.size();
    const std::size_t slots = 2 * j;
    const Index d = 2 * m;
    const std::size_t n = xi.grid.size;

    // Active support window: indices where any photon column is nonzero.
    std::size_t lo = n, hi = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double mag = 0.0;
        for (Index k : photons) mag += xi.column(i, k).cwiseAbs().maxCoeff();
        if (mag > 0.0) {
            lo = std::min(lo, i);
            hi = std::max(hi, i);
        }
    }
    NormalizationResult res;
    res.matchings = 1;
    for (std::size_t p = 3; p <= slots - 1; p += 2) res.matchings *= static_cast<int>(p);
    if (lo >= hi) {
        res.coarse_warning = true; // nothing to integrate
        return res;
    }

    PairEngine eng;
    eng.d = d;
    eng.win = hi - lo + 1;
    eng.dt = xi.grid.dt;
    eng.general = R.general;
    eng.times.resize(eng.win);
    for (std::size_t i = 0; i < eng.win; ++i) eng.times[i] = xi.grid.time(lo + i);

    // Slot vectors: p < j pairs with the adjoint side in reversed column
    // order, u_p = J·conj(ξ column); p ≥ j is the plain side, u_p = Θᵀ·ξ column.
    const Matrix J = dmat::jmat(m);
    const Matrix Tt = dmat::theta(m).transpose();
    const Matrix P = dmat::swap_halves(m);
    const Matrix DP = R.delta_coeff * P;

    eng.u.assign(slots, std::vector<Complex>(eng.win * d));
    eng.pu.assign(slots, std::vector<Complex>(eng.win * d));
    eng.dpu.assign(slots, std::vector<Complex>(eng.win * d));
    for (std::size_t p = 0; p < slots; ++p) {
        const Index k = (p < j) ? photons[j - 1 - p] : photons[p - j];
        for (std::size_t i = 0; i < eng.win; ++i) {
            const Vector col = xi.column(lo + i, k);
            const Vector up = (p < j) ? Vector(J * col.conjugate()) : Vector(Tt * col);
            const Vector wu = P * up;
            const Vector du = DP * up;
            for (Index c = 0; c < d; ++c) {
                eng.u[p][i * d + c] = up(c);
                eng.pu[p][i * d + c] = wu(c);
                eng.dpu[p][i * d + c] = du(c);
            }
        }
    }

    if (R.background) {
        eng.has_bg = true;
        const std::size_t dd = static_cast<std::size_t>(d) * static_cast<std::size_t>(d);
        eng.lag.resize((2 * eng.win - 1) * dd);
        for (std::size_t k = 0; k < 2 * eng.win - 1; ++k) {
            const double tau = (static_cast<double>(k) - static_cast<double>(eng.win - 1)) * eng.dt;
            const Matrix K = R.background(tau);
            for (Index r = 0; r < d; ++r)
                for (Index c = 0; c < d; ++c)
                    eng.lag[k * dd + static_cast<std::size_t>(r * d + c)] = K(r, c);
        }
    }

    eng.sep_left.assign(R.separable.size(), std::vector<Complex>(eng.win * d));
    eng.sep_right.assign(R.separable.size(), std::vector<Complex>(eng.win * d));
    for (std::size_t s = 0; s < R.separable.size(); ++s)
        for (std::size_t i = 0; i < eng.win; ++i) {
            const Vector L = R.separable[s].left(eng.times[i]);
            const Vector Rv = R.separable[s].right(eng.times[i]);
            for (Index c = 0; c < d; ++c) {
                eng.sep_left[s][i * d + c] = L(c);
                eng.sep_right[s][i * d + c] = Rv(c);
            }
        }

    // Pair tables on the fine grid and on a 2× coarser subgrid.
    auto evaluate = [&](std::size_t stride) -> Complex {
        std::vector<std::vector<Complex>> table(slots, std::vector<Complex>(slots));
        for (std::size_t p = 0; p < slots; ++p)
            for (std::size_t q = p + 1; q < slots; ++q)
                table[p][q] = eng.pair_integral(p, q, stride);
        std::vector<bool> used(slots, false);
        Complex total{0.0, 0.0};
        int count = 0;
        matching_sum(table, used, Complex{1.0, 0.0}, total, count);
        if (count != res.matchings)
            throw NumericalError("Normalization: internal matching enumeration mismatch");
        return total;
    };

    const Complex fine = evaluate(1);
    res.value = fine.real();
    res.imag_residual = std::abs(fine.imag());
    if (eng.win >= 5) {
        const Complex coarse = evaluate(2);
        res.quad_error = std::abs(fine - coarse) / 3.0;
    }
    res.coarse_warning = res.quad_error > tol;
    return res;
}

NormalizationResult normalization(const PulseMatrix& xi, const CovKernel& R, double tol) {
    std::vector<Index> photons(static_cast<std::size_t>(xi.n_ch));
    for (Index k = 0; k < xi.n_ch; ++k) photons[static_cast<std::size_t>(k)] = k;
    return normalization(xi, R, photons, tol);
}

} // namespace qls::fields
