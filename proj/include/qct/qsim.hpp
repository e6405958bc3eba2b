// Exact density-matrix simulator for one pair of spin-1/2 particles.
//
// State space: 4x4 complex density matrix in the product basis
// {up-up, up-down, down-up, down-down}; Alice owns the left tensor factor.
// Everything here is exact linear algebra; the only sampling happens in
// measure_spin, which draws the Born-rule outcome and collapses the state.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <utility>

#include "qct/rng.hpp"

namespace qct::qsim {

using Complex = std::complex<double>;
using Matrix2 = Eigen::Matrix2cd;
using Matrix4 = Eigen::Matrix4cd;
using Vector4 = Eigen::Vector4cd;

enum class Side { Alice, Bob };

enum class PauliOp { Id, X, Y, Z };

enum class BellKind { PsiMinus, PsiPlus, PhiMinus, PhiPlus };

// Outcome of a spin measurement along an axis: Up = +1 eigenvalue.
enum class Outcome : int { Up = +1, Down = -1 };

constexpr int sign(Outcome o) { return static_cast<int>(o); }
constexpr Outcome flipped(Outcome o) { return o == Outcome::Up ? Outcome::Down : Outcome::Up; }

// Commitment symbol convention: +1 along the measurement axis (up/right) -> 1,
// -1 (down/left) -> 0, independent of which axis was used.
constexpr int symbol(Outcome o) { return o == Outcome::Up ? 1 : 0; }

// Measurement direction; a unit vector on the Bloch sphere.
struct Axis {
  double x = 0.0;
  double y = 0.0;
  double z = 1.0;

  bool is_unit(double tol = 1e-9) const;
};

constexpr Axis axis_z() { return Axis{0.0, 0.0, 1.0}; }
constexpr Axis axis_x() { return Axis{1.0, 0.0, 0.0}; }

bool same_axis(const Axis& a, const Axis& b, double tol = 1e-9);
Axis random_axis(Rng& rng);  // uniform on the sphere
Axis random_xz(Rng& rng);    // X or Z, equal odds

const Matrix2& pauli_matrix(PauliOp op);
PauliOp random_pauli(Rng& rng);

// (I + sign * axis.sigma) / 2
Matrix2 spin_projector(const Axis& axis, Outcome o);

class PairState {
 public:
  // Default = the maximally mixed pair state I/4.
  PairState();
  explicit PairState(Matrix4 rho);

  const Matrix4& matrix() const { return rho_; }

  double trace() const;
  double purity() const;
  double min_eigenvalue() const;
  Matrix2 marginal(Side side) const;

  // Hermitian within herm_tol, unit trace within herm_tol, spectrum above
  // -psd_tol.
  bool is_valid_density(double herm_tol = 1e-12, double psd_tol = 1e-9) const;

 private:
  Matrix4 rho_;
};

double max_abs_diff(const PairState& a, const PairState& b);

PairState bell_state(BellKind kind);
Vector4 bell_amplitudes(BellKind kind);

// Product state: left particle polarized `left` along `left_axis`, right
// particle polarized `right` along `right_axis`.
PairState product_state(Outcome left, const Axis& left_axis, Outcome right, const Axis& right_axis);

PairState maximally_mixed();

// Conjugate one side by a Pauli unitary.
PairState apply_pauli(const PairState& s, Side side, PauliOp op);

// Born-rule measurement of one side's spin along `axis`. Returns the outcome
// and the collapsed, renormalized state. Probabilities within 1e-12 of 0 or 1
// are clamped so the impossible branch can never be drawn.
std::pair<Outcome, PairState> measure_spin(const PairState& s, Side side, const Axis& axis, Rng& rng);

double prob_up(const PairState& s, Side side, const Axis& axis);

// Probability that measurements along axis_a (Alice) and axis_b (Bob) yield
// opposite signs.
double anticorrelation_prob(const PairState& s, const Axis& axis_a, const Axis& axis_b);

// Single-side depolarizing channel with weight p (uniform Pauli twirl).
PairState depolarize(const PairState& s, Side side, double p);
PairState depolarize_both(const PairState& s, double p);

// Equal-weight mixture; the list must be non-empty.
PairState mix_equal(std::span<const PairState> states);

}  // namespace qct::qsim
