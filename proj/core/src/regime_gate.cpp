#include "propas/regime_gate.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "propas/errors.hpp"
#include "propas/least_squares.hpp"
#include "propas/units.hpp"

namespace propas::gate {

CubicFit fit_cubic(std::span<const JcPoint> points) {
  std::set<double> distinct;
  for (const auto& p : points) distinct.insert(p.j);
  if (distinct.size() < 4) {
    throw RankDeficientError("fit_cubic: need at least 4 distinct J values");
  }

  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd a(n, 4);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double j = points[static_cast<std::size_t>(i)].j;
    a(i, 0) = 1.0;
    a(i, 1) = j;
    a(i, 2) = j * j;
    a(i, 3) = j * j * j;
    b(i) = points[static_cast<std::size_t>(i)].c_p;
  }
  const auto sol = solve_least_squares(a, b);
  if (sol.rank < 4) throw RankDeficientError("fit_cubic: Vandermonde matrix is rank deficient");
  return {{sol.x(0), sol.x(1), sol.x(2), sol.x(3)}};
}

std::vector<double> critical_points(const CubicFit& fit) {
  // c1 + 2 c2 J + 3 c3 J^2 = 0
  const double qa = 3.0 * fit.c[3];
  const double qb = 2.0 * fit.c[2];
  const double qc = fit.c[1];

  std::vector<double> roots;
  if (qa == 0.0) {
    if (qb != 0.0) roots.push_back(-qc / qb);
  } else {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc == 0.0) {
      roots.push_back(-qb / (2.0 * qa));
    } else if (disc > 0.0) {
      // Cancellation-free pair of roots.
      const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
      roots.push_back(q / qa);
      if (q != 0.0) roots.push_back(qc / q);
    }
  }

  std::vector<double> out;
  for (double r : roots) {
    if (r > 0.0) out.push_back(r);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<bool> selection_mask(std::span<const double> j, std::span<const double> critical) {
  std::vector<bool> mask(j.size(), true);
  if (critical.empty()) return mask;
  const double threshold = *std::max_element(critical.begin(), critical.end());
  for (std::size_t i = 0; i < j.size(); ++i) mask[i] = j[i] > threshold;
  return mask;
}

void validate(const GateConfig& cfg) {
  if (!(cfg.alpha_th_deg > 0.0 && cfg.alpha_th_deg < 90.0)) {
    throw std::invalid_argument("GateConfig: alpha_th must lie in (0, 90) deg");
  }
  if (!(cfg.v_min >= 0.0)) throw std::invalid_argument("GateConfig: v_min must be >= 0");
}

double flight_path_angle(const Eigen::Vector3d& v_ned, GammaSign sign) {
  const double speed = v_ned.norm();
  if (!(speed > 0.0)) throw ZeroVelocityError("flight_path_angle: zero earth-frame velocity");
  const double ratio = std::clamp(v_ned.z() / speed, -1.0, 1.0);
  const double gamma = std::asin(ratio);
  return sign == GammaSign::kLiteral ? gamma : -gamma;
}

double angle_of_attack(double theta, const Eigen::Vector3d& v_ned, GammaSign sign) {
  return theta - flight_path_angle(v_ned, sign);
}

bool gate(double alpha, double v_hat, const GateConfig& cfg) {
  return std::abs(units::rad_to_deg(alpha)) < cfg.alpha_th_deg && v_hat > cfg.v_min;
}

}  // namespace propas::gate
