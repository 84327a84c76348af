#include "beliefuse/dst.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "beliefuse/errors.hpp"

namespace beliefuse {
namespace {

constexpr double kNegativeSlack = 1e-9;

double clamp_mass(double m) {
  if (!std::isfinite(m)) throw std::invalid_argument("Bpa: mass must be finite");
  if (m < -kNegativeSlack) throw std::invalid_argument("Bpa: negative mass");
  return m < 0.0 ? 0.0 : m;
}

}  // namespace

Bpa Bpa::from_masses(double target, double non_target, double intermediate) {
  const double t = clamp_mass(target);
  const double nt = clamp_mass(non_target);
  const double i = clamp_mass(intermediate);
  const double sum = t + nt + i;
  if (!(sum > 0.0)) throw std::invalid_argument("Bpa: masses sum to zero");
  if (sum == 1.0) return Bpa(t, nt, i);
  return Bpa(t / sum, nt / sum, i / sum);
}

Bpa Bpa::certain(Hypothesis h) noexcept {
  switch (h) {
    case Hypothesis::kTarget:
      return Bpa(1.0, 0.0, 0.0);
    case Hypothesis::kNonTarget:
      return Bpa(0.0, 1.0, 0.0);
    case Hypothesis::kIntermediate:
      break;
  }
  return vacuous();
}

double Bpa::mass(Hypothesis h) const noexcept {
  switch (h) {
    case Hypothesis::kTarget:
      return t_;
    case Hypothesis::kNonTarget:
      return nt_;
    case Hypothesis::kIntermediate:
      break;
  }
  return i_;
}

double belief(const Bpa& bpa, Hypothesis h) noexcept {
  switch (h) {
    case Hypothesis::kTarget:
      return bpa.target();
    case Hypothesis::kNonTarget:
      return bpa.non_target();
    case Hypothesis::kIntermediate:
      break;
  }
  return bpa.target() + bpa.non_target() + bpa.intermediate();
}

Bpa combine(const Bpa& a, const Bpa& b) {
  // Cross terms are summed pairwise first so that swapping a and b produces
  // identical floating-point results.
  const double t = a.t_ * b.t_ + (a.t_ * b.i_ + a.i_ * b.t_);
  const double nt = a.nt_ * b.nt_ + (a.nt_ * b.i_ + a.i_ * b.nt_);
  const double i = a.i_ * b.i_;
  // Without conflict the normalizer is exactly 1; leaving the masses undivided
  // keeps the vacuous assignment an exact identity.
  const double conflict = a.t_ * b.nt_ + a.nt_ * b.t_;
  const double normalizer = conflict == 0.0 ? 1.0 : t + nt + i;
  if (!(normalizer > kConflictEpsilon)) throw TotalConflict(normalizer);
  return Bpa(t / normalizer, nt / normalizer, i / normalizer);
}

Bpa combine_all(std::span<const Bpa> bpas) {
  if (bpas.empty()) throw std::invalid_argument("combine_all: empty list");
  Bpa acc = bpas.front();
  for (std::size_t k = 1; k < bpas.size(); ++k) acc = combine(acc, bpas[k]);
  return acc;
}

Bpa combine_all_direct(std::span<const Bpa> bpas) {
  if (bpas.empty()) throw std::invalid_argument("combine_all_direct: empty list");
  if (bpas.size() > 16) throw std::invalid_argument("combine_all_direct: K > 16");
  const std::size_t k = bpas.size();
  std::uint64_t patterns = 1;
  for (std::size_t j = 0; j < k; ++j) patterns *= 3;

  double acc_t = 0.0;
  double acc_nt = 0.0;
  double acc_i = 0.0;
  for (std::uint64_t code = 0; code < patterns; ++code) {
    std::uint64_t rest = code;
    double product = 1.0;
    bool has_t = false;
    bool has_nt = false;
    for (std::size_t j = 0; j < k; ++j) {
      switch (rest % 3) {
        case 0:
          product *= bpas[j].t_;
          has_t = true;
          break;
        case 1:
          product *= bpas[j].nt_;
          has_nt = true;
          break;
        default:
          product *= bpas[j].i_;
          break;
      }
      rest /= 3;
    }
    if (has_t && has_nt) continue;  // empty intersection
    if (has_t) {
      acc_t += product;
    } else if (has_nt) {
      acc_nt += product;
    } else {
      acc_i += product;
    }
  }
  const double normalizer = acc_t + acc_nt + acc_i;
  if (!(normalizer > kConflictEpsilon)) throw TotalConflict(normalizer);
  return Bpa(acc_t / normalizer, acc_nt / normalizer, acc_i / normalizer);
}

FusedVerdict FusedVerdict::from_joint(const Bpa& joint) noexcept {
  return FusedVerdict{joint, joint.target() - joint.non_target()};
}

}  // namespace beliefuse
