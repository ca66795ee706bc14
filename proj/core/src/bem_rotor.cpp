#include "propas/bem_rotor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "propas/errors.hpp"

namespace propas::bem {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLossFloor = 1e-6;
constexpr double kStaticInflow = 1e-12;

double interpolate(std::span<const double> x, std::span<const double> y, double at) {
  if (at <= x.front()) return y.front();
  if (at >= x.back()) return y.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), at) - x.begin());
  const std::size_t lo = hi - 1;
  const double t = (at - x[lo]) / (x[hi] - x[lo]);
  return y[lo] + t * (y[hi] - y[lo]);
}

double prandtl_loss(const BladeGeometry& geom, double r, double sin_phi) {
  const double b = static_cast<double>(geom.blade_count());
  const double s = std::abs(sin_phi);
  const double f_tip_arg = 0.5 * b * (geom.tip_radius() - r) / (r * s);
  const double f_hub_arg = 0.5 * b * (r - geom.hub_radius()) / (geom.hub_radius() * s);
  const double f_tip = 2.0 / kPi * std::acos(std::exp(-f_tip_arg));
  const double f_hub = 2.0 / kPi * std::acos(std::exp(-f_hub_arg));
  return std::max(f_tip * f_hub, kLossFloor);
}

std::string describe(const FlowCondition& flow, double r) {
  std::ostringstream os;
  os << "V_a=" << flow.v_a << " m/s, omega=" << flow.omega << " rad/s, r=" << r << " m";
  return os.str();
}

}  // namespace

AirfoilPolar::AirfoilPolar(std::vector<double> alpha_rad, std::vector<double> cl,
                           std::vector<double> cd)
    : alpha_(std::move(alpha_rad)), cl_(std::move(cl)), cd_(std::move(cd)) {
  if (alpha_.size() < 2) throw std::invalid_argument("AirfoilPolar: need at least two samples");
  if (cl_.size() != alpha_.size() || cd_.size() != alpha_.size()) {
    throw std::invalid_argument("AirfoilPolar: cl/cd length differs from alpha grid");
  }
  for (std::size_t i = 1; i < alpha_.size(); ++i) {
    if (!(alpha_[i] > alpha_[i - 1])) {
      throw std::invalid_argument("AirfoilPolar: alpha grid must be strictly increasing");
    }
  }
  for (double d : cd_) {
    if (!(d >= 0.0)) throw std::invalid_argument("AirfoilPolar: cd must be non-negative");
  }
}

double AirfoilPolar::lookup(const std::vector<double>& table, double alpha) const {
  return interpolate(alpha_, table, alpha);
}

double AirfoilPolar::cl(double alpha) const { return lookup(cl_, alpha); }
double AirfoilPolar::cd(double alpha) const { return lookup(cd_, alpha); }

BladeGeometry::BladeGeometry(std::vector<BladeStation> stations, double hub_radius, double diameter,
                             int blade_count)
    : stations_(std::move(stations)),
      hub_radius_(hub_radius),
      diameter_(diameter),
      blade_count_(blade_count) {
  if (!(diameter_ > 0.0)) throw std::invalid_argument("BladeGeometry: diameter must be positive");
  if (!(hub_radius_ > 0.0) || hub_radius_ >= tip_radius()) {
    throw std::invalid_argument("BladeGeometry: hub radius must lie in (0, D/2)");
  }
  if (blade_count_ < 2) throw std::invalid_argument("BladeGeometry: blade_count must be >= 2");
  if (stations_.size() < 2)
    throw std::invalid_argument("BladeGeometry: need at least two stations");
  for (std::size_t i = 0; i < stations_.size(); ++i) {
    const auto& s = stations_[i];
    if (!(s.r > hub_radius_ && s.r < tip_radius())) {
      throw std::invalid_argument("BladeGeometry: station radius outside (hub, tip)");
    }
    if (!(s.chord > 0.0)) throw std::invalid_argument("BladeGeometry: chord must be positive");
    if (i > 0 && !(s.r > stations_[i - 1].r)) {
      throw std::invalid_argument("BladeGeometry: stations must be sorted by radius");
    }
  }
}

BladeStation BladeGeometry::at(double r) const {
  if (r <= stations_.front().r) return {r, stations_.front().chord, stations_.front().twist};
  if (r >= stations_.back().r) return {r, stations_.back().chord, stations_.back().twist};
  const auto it = std::upper_bound(stations_.begin(), stations_.end(), r,
                                   [](double v, const BladeStation& s) { return v < s.r; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double t = (r - lo.r) / (hi.r - lo.r);
  return {r, lo.chord + t * (hi.chord - lo.chord), lo.twist + t * (hi.twist - lo.twist)};
}

void validate(const FlowCondition& flow) {
  if (!(flow.omega > 0.0)) throw std::invalid_argument("FlowCondition: omega must be positive");
  if (!(flow.rho > 0.0)) throw std::invalid_argument("FlowCondition: rho must be positive");
  if (!(flow.v_a >= 0.0)) throw std::invalid_argument("FlowCondition: V_a must be non-negative");
}

ResidualTerms section_residual(const BladeGeometry& geom, const AirfoilPolar& polar,
                               const FlowCondition& flow, double r, double phi) {
  const BladeStation st = geom.at(r);
  const double s = std::sin(phi);
  const double c = std::cos(phi);
  const double alpha = st.twist - phi;
  const double cl = polar.cl(alpha);
  const double cd = polar.cd(alpha);

  ResidualTerms out;
  out.cn = cl * c - cd * s;
  out.ct = cl * s + cd * c;
  out.loss_factor = prandtl_loss(geom, r, s);
  const double f = out.loss_factor;
  const double sigma = static_cast<double>(geom.blade_count()) * st.chord / (2.0 * kPi * r);

  if (flow.v_a <= kStaticInflow) {
    out.residual = s * s - sigma * out.cn / (4.0 * f);
    return out;
  }

  // k and kp are the propeller-sense loading parameters; the turbine-sense
  // values used by the residual are their negatives.
  const double k = sigma * out.cn / (4.0 * f * s * s);
  const double kp = sigma * out.ct / (4.0 * f * s * c);
  const double k_t = -k;
  const double inflow_ratio = flow.v_a / (flow.omega * r);

  double axial_term = 0.0;  // sin(phi) / (1 - a)
  if (k_t <= 2.0 / 3.0) {
    // Momentum region: 1 - a = 1/(1 + k_t), written without the pole at k_t = -1.
    out.a = (1.0 + k_t) != 0.0 ? k_t / (1.0 + k_t) : std::numeric_limits<double>::infinity();
    axial_term = s * (1.0 + k_t);
  } else {
    // Buhl empirical correction for highly loaded (windmilling) elements.
    const double g1 = 2.0 * f * k_t - (10.0 / 9.0 - f);
    const double g2 = 2.0 * f * k_t - f * (4.0 / 3.0 - f);
    const double g3 = 2.0 * f * k_t - (25.0 / 9.0 - 2.0 * f);
    out.a = std::abs(g3) < 1e-6 ? 1.0 - 1.0 / (2.0 * std::sqrt(g2)) : (g1 - std::sqrt(g2)) / g3;
    axial_term = s / (1.0 - out.a);
  }
  // 1 + a' = 1/(1 + kp)
  out.a_prime = (1.0 + kp) != 0.0 ? -kp / (1.0 + kp) : std::numeric_limits<double>::infinity();
  out.residual = axial_term - inflow_ratio * c * (1.0 + kp);
  return out;
}

SectionSolution solve_section(const BladeGeometry& geom, const AirfoilPolar& polar,
                              const FlowCondition& flow, double r) {
  validate(flow);
  if (!(r > geom.hub_radius() && r < geom.tip_radius())) {
    throw std::invalid_argument("solve_section: radius outside (hub, tip)");
  }

  double lo = kPhiLower;
  double hi = 0.5 * kPi;
  double f_lo = section_residual(geom, polar, flow, r, lo).residual;
  const double f_hi = section_residual(geom, polar, flow, r, hi).residual;
  if (!std::isfinite(f_lo) || !std::isfinite(f_hi) || std::signbit(f_lo) == std::signbit(f_hi)) {
    throw NoBracketError("no sign change of the BEM residual on (1e-6, pi/2] at " +
                         describe(flow, r));
  }

  double phi = 0.5 * (lo + hi);
  ResidualTerms terms = section_residual(geom, polar, flow, r, phi);
  for (int it = 0; it < kMaxBisectionIterations; ++it) {
    phi = 0.5 * (lo + hi);
    terms = section_residual(geom, polar, flow, r, phi);
    if (terms.residual == 0.0 || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      break;
    }
    if (std::signbit(terms.residual) == std::signbit(f_lo)) {
      lo = phi;
      f_lo = terms.residual;
    } else {
      hi = phi;
    }
  }
  if (!(std::abs(terms.residual) <= kResidualTolerance)) {
    throw NoBracketError("BEM residual bracket collapsed onto a discontinuity at " +
                         describe(flow, r));
  }

  const BladeStation st = geom.at(r);
  SectionSolution out;
  out.phi = phi;
  out.residual = terms.residual;
  const double wr = flow.omega * r;
  if (flow.v_a <= kStaticInflow) {
    out.a = 0.0;
    out.a_prime = 0.0;
    out.w = wr / std::cos(phi);
  } else {
    out.a = terms.a;
    out.a_prime = terms.a_prime;
    out.w = std::hypot(flow.v_a * (1.0 - out.a), wr * (1.0 + out.a_prime));
  }
  const double q = 0.5 * flow.rho * out.w * out.w * st.chord;
  out.d_thrust = q * terms.cn;
  out.d_torque = q * terms.ct * r;
  return out;
}

RotorPerformance solve_rotor(const BladeGeometry& geom, const AirfoilPolar& polar,
                             const FlowCondition& flow) {
  validate(flow);
  const auto stations = geom.stations();
  if (stations.size() < 10) throw std::invalid_argument("solve_rotor: need at least 10 stations");

  std::vector<double> d_thrust(stations.size());
  std::vector<double> d_torque(stations.size());
  bool converged = true;
  for (std::size_t i = 0; i < stations.size(); ++i) {
    try {
      const SectionSolution sec = solve_section(geom, polar, flow, stations[i].r);
      d_thrust[i] = sec.d_thrust;
      d_torque[i] = sec.d_torque;
    } catch (const NoBracketError&) {
      converged = false;
      break;
    }
  }

  const double n = flow.omega / (2.0 * kPi);
  const double d = geom.diameter();
  RotorPerformance out;
  out.j = flow.v_a / (n * d);
  out.converged = converged;
  if (!converged) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.thrust = out.torque = out.power = out.c_p = nan;
    return out;
  }

  double thrust = 0.0;
  double torque = 0.0;
  for (std::size_t i = 1; i < stations.size(); ++i) {
    const double h = stations[i].r - stations[i - 1].r;
    thrust += 0.5 * h * (d_thrust[i] + d_thrust[i - 1]);
    torque += 0.5 * h * (d_torque[i] + d_torque[i - 1]);
  }
  const double b = static_cast<double>(geom.blade_count());
  out.thrust = b * thrust;
  out.torque = b * torque;
  out.power = out.torque * flow.omega;
  out.c_p = out.power / (flow.rho * n * n * n * std::pow(d, 5));
  return out;
}

namespace {

std::vector<double> expand(const SweepRange& range) {
  if (range.steps < 1) throw std::invalid_argument("SweepRange: steps must be >= 1");
  if (range.steps == 1) return {range.min};
  if (!(range.max > range.min)) throw std::invalid_argument("SweepRange: max must exceed min");
  std::vector<double> out(static_cast<std::size_t>(range.steps));
  const double h = (range.max - range.min) / static_cast<double>(range.steps - 1);
  for (int i = 0; i < range.steps; ++i) out[static_cast<std::size_t>(i)] = range.min + h * i;
  out.back() = range.max;
  return out;
}

}  // namespace

std::vector<DatasetRow> generate_dataset(const BladeGeometry& geom, const AirfoilPolar& polar,
                                         const SweepRange& v_range, const SweepRange& omega_range,
                                         double rho) {
  const auto speeds = expand(v_range);
  const auto omegas = expand(omega_range);
  std::vector<DatasetRow> rows;
  rows.reserve(speeds.size() * omegas.size());
  for (double omega : omegas) {
    for (double v : speeds) {
      const RotorPerformance perf = solve_rotor(geom, polar, {v, omega, rho});
      rows.push_back({v, omega, perf.power, perf.j, perf.c_p, perf.converged});
    }
  }
  return rows;
}

}  // namespace propas::bem
