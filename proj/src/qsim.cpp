#include "qct/qsim.hpp"

#include <cmath>
#include <stdexcept>

namespace qct::qsim {

namespace {

constexpr double kProbClamp = 1e-12;

const Matrix2& identity2() {
  static const Matrix2 id = Matrix2::Identity();
  return id;
}

Matrix4 kron2(const Matrix2& a, const Matrix2& b) {
  Matrix4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

// Pauli on one side of the pair, cached for all eight combinations.
const Matrix4& side_pauli(Side side, PauliOp op) {
  static const auto table = [] {
    std::array<Matrix4, 8> t;
    for (int s = 0; s < 2; ++s)
      for (int u = 0; u < 4; ++u) {
        const Matrix2& p = pauli_matrix(static_cast<PauliOp>(u));
        t[static_cast<std::size_t>(4 * s + u)] =
            s == 0 ? kron2(p, identity2()) : kron2(identity2(), p);
      }
    return t;
  }();
  return table[static_cast<std::size_t>(4 * (side == Side::Bob ? 1 : 0) + static_cast<int>(op))];
}

Matrix4 side_operator(Side side, const Matrix2& m) {
  return side == Side::Alice ? kron2(m, identity2()) : kron2(identity2(), m);
}

void require_unit(const Axis& axis) {
  if (!axis.is_unit()) throw std::invalid_argument("measurement axis must be a unit vector");
}

void require_prob(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
}

Matrix4 rehermitized(const Matrix4& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace

bool Axis::is_unit(double tol) const {
  return std::abs(std::sqrt(x * x + y * y + z * z) - 1.0) <= tol;
}

bool same_axis(const Axis& a, const Axis& b, double tol) {
  return std::abs(a.x - b.x) <= tol && std::abs(a.y - b.y) <= tol && std::abs(a.z - b.z) <= tol;
}

Axis random_axis(Rng& rng) {
  double z = 2.0 * unit_real(rng) - 1.0;
  double phi = 2.0 * M_PI * unit_real(rng);
  double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return Axis{r * std::cos(phi), r * std::sin(phi), z};
}

Axis random_xz(Rng& rng) { return coin(rng) ? axis_x() : axis_z(); }

const Matrix2& pauli_matrix(PauliOp op) {
  static const Matrix2 id = Matrix2::Identity();
  static const Matrix2 x = (Matrix2() << 0, 1, 1, 0).finished();
  static const Matrix2 y = (Matrix2() << 0, Complex(0, -1), Complex(0, 1), 0).finished();
  static const Matrix2 z = (Matrix2() << 1, 0, 0, -1).finished();
  switch (op) {
    case PauliOp::X: return x;
    case PauliOp::Y: return y;
    case PauliOp::Z: return z;
    default: return id;
  }
}

PauliOp random_pauli(Rng& rng) { return static_cast<PauliOp>(bounded(rng, 4)); }

Matrix2 spin_projector(const Axis& axis, Outcome o) {
  Matrix2 n_sigma;
  n_sigma << Complex(axis.z, 0), Complex(axis.x, -axis.y), Complex(axis.x, axis.y), Complex(-axis.z, 0);
  return 0.5 * (identity2() + static_cast<double>(sign(o)) * n_sigma);
}

PairState::PairState() : rho_(0.25 * Matrix4::Identity()) {}

PairState::PairState(Matrix4 rho) : rho_(std::move(rho)) {}

double PairState::trace() const { return rho_.trace().real(); }

double PairState::purity() const { return (rho_ * rho_).trace().real(); }

double PairState::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix4> solver(rho_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

Matrix2 PairState::marginal(Side side) const {
  Matrix2 out = Matrix2::Zero();
  if (side == Side::Alice) {
    for (int a = 0; a < 2; ++a)
      for (int a2 = 0; a2 < 2; ++a2)
        for (int b = 0; b < 2; ++b) out(a, a2) += rho_(2 * a + b, 2 * a2 + b);
  } else {
    for (int b = 0; b < 2; ++b)
      for (int b2 = 0; b2 < 2; ++b2)
        for (int a = 0; a < 2; ++a) out(b, b2) += rho_(2 * a + b, 2 * a + b2);
  }
  return out;
}

bool PairState::is_valid_density(double herm_tol, double psd_tol) const {
  if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > herm_tol) return false;
  if (std::abs(trace() - 1.0) > herm_tol) return false;
  return min_eigenvalue() >= -psd_tol;
}

double max_abs_diff(const PairState& a, const PairState& b) {
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

Vector4 bell_amplitudes(BellKind kind) {
  const double r = 1.0 / std::sqrt(2.0);
  Vector4 v = Vector4::Zero();
  switch (kind) {
    case BellKind::PsiMinus: v(1) = r; v(2) = -r; break;
    case BellKind::PsiPlus:  v(1) = r; v(2) = r;  break;
    case BellKind::PhiMinus: v(0) = r; v(3) = -r; break;
    case BellKind::PhiPlus:  v(0) = r; v(3) = r;  break;
  }
  return v;
}

PairState bell_state(BellKind kind) {
  static const auto table = [] {
    std::array<Matrix4, 4> t;
    for (int k = 0; k < 4; ++k) {
      Vector4 v = bell_amplitudes(static_cast<BellKind>(k));
      t[static_cast<std::size_t>(k)] = v * v.adjoint();
    }
    return t;
  }();
  return PairState(table[static_cast<std::size_t>(kind)]);
}

PairState product_state(Outcome left, const Axis& left_axis, Outcome right, const Axis& right_axis) {
  require_unit(left_axis);
  require_unit(right_axis);
  return PairState(kron2(spin_projector(left_axis, left), spin_projector(right_axis, right)));
}

PairState maximally_mixed() { return PairState(); }

PairState apply_pauli(const PairState& s, Side side, PauliOp op) {
  if (op == PauliOp::Id) return s;
  const Matrix4& u = side_pauli(side, op);
  return PairState(rehermitized(u * s.matrix() * u.adjoint()));
}

double prob_up(const PairState& s, Side side, const Axis& axis) {
  require_unit(axis);
  Matrix4 p = side_operator(side, spin_projector(axis, Outcome::Up));
  double value = (p * s.matrix()).trace().real();
  return std::clamp(value, 0.0, 1.0);
}

std::pair<Outcome, PairState> measure_spin(const PairState& s, Side side, const Axis& axis, Rng& rng) {
  double p_up = prob_up(s, side, axis);
  if (p_up < kProbClamp) p_up = 0.0;
  if (p_up > 1.0 - kProbClamp) p_up = 1.0;
  const Outcome o = unit_real(rng) < p_up ? Outcome::Up : Outcome::Down;
  const double norm = o == Outcome::Up ? p_up : 1.0 - p_up;
  Matrix4 proj = side_operator(side, spin_projector(axis, o));
  Matrix4 collapsed = rehermitized(proj * s.matrix() * proj) / norm;
  return {o, PairState(std::move(collapsed))};
}

double anticorrelation_prob(const PairState& s, const Axis& axis_a, const Axis& axis_b) {
  require_unit(axis_a);
  require_unit(axis_b);
  Matrix4 opposite = kron2(spin_projector(axis_a, Outcome::Up), spin_projector(axis_b, Outcome::Down)) +
                     kron2(spin_projector(axis_a, Outcome::Down), spin_projector(axis_b, Outcome::Up));
  double value = (opposite * s.matrix()).trace().real();
  return std::clamp(value, 0.0, 1.0);
}

PairState depolarize(const PairState& s, Side side, double p) {
  require_prob(p, "depolarizing weight");
  if (p == 0.0) return s;
  Matrix4 twirl = Matrix4::Zero();
  for (int u = 0; u < 4; ++u) {
    const Matrix4& op = side_pauli(side, static_cast<PauliOp>(u));
    twirl += op * s.matrix() * op.adjoint();
  }
  return PairState(rehermitized((1.0 - p) * s.matrix() + (p / 4.0) * twirl));
}

PairState depolarize_both(const PairState& s, double p) {
  return depolarize(depolarize(s, Side::Alice, p), Side::Bob, p);
}

PairState mix_equal(std::span<const PairState> states) {
  if (states.empty()) throw std::invalid_argument("mix_equal needs at least one state");
  Matrix4 acc = Matrix4::Zero();
  for (const PairState& s : states) acc += s.matrix();
  return PairState(acc / static_cast<double>(states.size()));
}

}  // namespace qct::qsim
