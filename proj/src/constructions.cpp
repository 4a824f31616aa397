#include "cptq/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "cptq/attainability.hpp"
#include "cptq/errors.hpp"

namespace cptq {

namespace {

constexpr double kLevelFloor = 1e-300;

}  // namespace

Level find_level(int n, const PricingKernel& k, const DistortionFunction& w_minus, const UtilityFunction& u_minus,
                 const Level& previous) {
  if (n < 1) throw ParameterError("find_level: n must be positive");
  const double target = -std::log(static_cast<double>(n));
  // log of w(a) u(1/a), as a function of s = -log a
  auto log_product = [&](double s) { return w_minus.log_value(std::exp(-s)) + u_minus.log_at_log(s); };
  auto admissible = [&](double s) { return log_product(s) < target; };

  const double s_prev = -std::log(previous.a);
  const double s_floor = -std::log(kLevelFloor);
  double s_hi = s_prev;  // largest a tried so far that failed (or the previous level)
  double s = s_prev + std::numbers::ln2;
  for (; s <= s_floor; s += std::numbers::ln2) {
    if (admissible(s)) break;
    s_hi = s;
  }
  if (s > s_floor) {
    throw ConstructionError(fmt::format(
        "find_level: no a above {} with w(a) u(1/a) < 1/{} (product at the floor: {}); the liminf condition "
        "appears to hold for this configuration",
        kLevelFloor, n, std::exp(log_product(s_floor))));
  }
  double s_lo = s;
  if (s_hi > s_prev || !admissible(s_hi)) {
    // crossing lies between the last failing ladder point and s
    for (int it = 0; it < 200 && s_lo - s_hi > 1e-13 * s_lo; ++it) {
      const double mid = 0.5 * (s_lo + s_hi);
      if (admissible(mid)) {
        s_lo = mid;
      } else {
        s_hi = mid;
      }
    }
  }
  Level level;
  level.a = std::exp(-s_lo);
  level.b = k.upper_quantile(level.a);
  return level;
}

SequenceElement build_element(int n, const PricingKernel& k, const CptPreferences& prefs, double x0,
                              const Level& level) {
  if (!(level.b > 2.0 * x0)) {
    throw ConstructionError(
        fmt::format("build_element: b_{} = {} does not exceed 2 x0 = {}; use a larger n", n, level.b, 2.0 * x0));
  }
  SequenceElement e;
  e.n = n;
  e.a_requested = level.a;
  e.a = level.a;
  e.b = level.b;
  if (!k.has_continuous_cdf()) {
    e.a = std::min(level.a, 1.0 - k.cdf(level.b));
    if (!(e.a > 0.0)) {
      throw ConstructionError(
          fmt::format("build_element: b_{} = {} is the top of the kernel support, so P{{rho > b}} = 0", n, level.b));
    }
    e.a_adjusted = std::abs(e.a - level.a) > 1e-12 * level.a;
  }
  e.q_a_comp = k.upper_partial(e.a);
  e.q_a = k.mean() - e.q_a_comp;
  if (e.q_a_comp < level.b * e.a * (1.0 - 1e-12)) {
    throw ConstructionError(fmt::format("build_element: Q(A^c) = {} below b P(A^c) = {}", e.q_a_comp, level.b * e.a));
  }
  e.x_atom = level.b / (2.0 * e.q_a);
  e.y_atom = (level.b - 2.0 * x0) / (2.0 * e.q_a_comp);
  e.law = Law::discrete({{-e.y_atom, e.a}, {e.x_atom, 1.0 - e.a}});
  e.cpt = cpt_value(e.law, prefs);
  e.cost = budget(k, e.law).value();
  return e;
}

NonattainabilityReport demonstrate_nonattainability(const NonattainabilityConfig& config) {
  const ExtendedReal m = config.prefs.u_plus.saturation();
  if (!m.is_finite()) throw ParameterError("demonstrate_nonattainability: u+ must be bounded");
  if (config.n_max < 1) throw ParameterError("demonstrate_nonattainability: n_max must be positive");
  NonattainabilityReport r;
  r.saturation = m.value();
  r.x0 = config.x0;
  r.liminf = liminf_condition(config.prefs.w_minus, config.prefs.u_minus);
  if (r.liminf.holds == Holds::yes) {
    throw ConstructionError(fmt::format(
        "liminf of w-(x) u-(1/x) is positive (verdict yes, estimate {}): the loss side cannot be made negligible, "
        "so this construction does not apply",
        r.liminf.parameter.value_or(0.0)));
  }
  Level level;
  for (int n = 1; n <= config.n_max; ++n) {
    level = find_level(n, config.kernel, config.prefs.w_minus, config.prefs.u_minus, level);
    if (!(level.b > 2.0 * config.x0)) continue;
    if (r.elements.empty()) r.n0 = n;
    r.elements.push_back(build_element(n, config.kernel, config.prefs, config.x0, level));
  }
  if (r.elements.empty()) {
    throw ConstructionError(fmt::format("no n <= {} reaches b_n > 2 x0 = {}", config.n_max, 2.0 * config.x0));
  }
  r.all_feasible = std::all_of(r.elements.begin(), r.elements.end(),
                               [&](const SequenceElement& e) { return std::abs(e.cost - config.x0) < 1e-8; });
  r.adjusted_levels = static_cast<int>(
      std::count_if(r.elements.begin(), r.elements.end(), [](const SequenceElement& e) { return e.a_adjusted; }));
  r.value_monotone = true;
  for (std::size_t i = 1; i < r.elements.size(); ++i) {
    if (r.elements[i].cpt.total < r.elements[i - 1].cpt.total) r.value_monotone = false;
  }
  r.final_gap = r.saturation - r.elements.back().cpt.total.value();
  r.gap_closed = r.elements.back().n == config.n_max && r.final_gap < config.gap_tol;
  if (r.all_feasible && r.gap_closed) {
    r.conclusion = fmt::format(
        "not attainable: every Z_n costs x0 and M - V(Z_{}) = {:.6g} < {}; the supremum M cannot be reached",
        config.n_max, r.final_gap, config.gap_tol);
  } else if (r.all_feasible) {
    r.conclusion = fmt::format("feasible sequence climbing towards M; gap {:.6g} at n = {} is not yet below {}",
                               r.final_gap, config.n_max, config.gap_tol);
  } else {
    r.conclusion = "some Z_n missed the budget; see the cost column";
  }
  if (r.adjusted_levels > 0) {
    r.conclusion += fmt::format(" ({} levels moved to the nearest a the kernel atoms allow)", r.adjusted_levels);
  }
  return r;
}

void write_report_csv(std::ostream& out, const NonattainabilityReport& report) {
  out << "n,a_n,b_n,V_plus,V_minus,V,gap\n";
  for (const SequenceElement& e : report.elements) {
    const double v = e.cpt.total.to_double();
    out << fmt::format("{},{},{},{},{},{},{}\n", e.n, e.a, e.b, e.cpt.v_plus, e.cpt.v_minus.to_string(),
                       e.cpt.total.to_string(), report.saturation - v);
  }
}

void write_report_svg(std::ostream& out, const NonattainabilityReport& report, const std::string& header_comment) {
  constexpr double width = 640.0;
  constexpr double height = 400.0;
  constexpr double margin = 50.0;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!header_comment.empty()) out << "<!--\n" << header_comment << "-->\n";
  out << fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
                     width, height, width, height);
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (report.elements.empty()) {
    out << "</svg>\n";
    return;
  }
  const double n_lo = report.elements.front().n;
  const double n_hi = std::max(n_lo + 1.0, static_cast<double>(report.elements.back().n));
  double v_lo = report.saturation;
  for (const auto& e : report.elements) v_lo = std::min(v_lo, e.cpt.total.to_double());
  const double v_hi = report.saturation;
  const double span = std::max(v_hi - v_lo, 1e-12);
  auto px = [&](double n) { return margin + (n - n_lo) / (n_hi - n_lo) * (width - 2 * margin); };
  auto py = [&](double v) { return height - margin - (v - v_lo) / span * (height - 2 * margin); };

  out << fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", margin, height - margin,
                     margin);
  out << fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", margin, height - margin,
                     width - margin);
  out << fmt::format(
      "<line x1=\"{}\" y1=\"{:.3f}\" x2=\"{}\" y2=\"{:.3f}\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n", margin,
      py(v_hi), width - margin, py(v_hi));
  out << fmt::format("<text x=\"{}\" y=\"{:.3f}\" font-size=\"12\">M = {:.6g}</text>\n", width - margin - 80,
                     py(v_hi) - 6, report.saturation);
  out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (const auto& e : report.elements) out << fmt::format("{:.3f},{:.3f} ", px(e.n), py(e.cpt.total.to_double()));
  out << "\"/>\n";
  out << fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\">n = {} .. {}</text>\n", width / 2 - 30,
                     height - margin + 30, report.elements.front().n, report.elements.back().n);
  out << fmt::format("<text x=\"10\" y=\"{}\" font-size=\"12\">V(Z_n)</text>\n", margin - 15);
  out << fmt::format("<text x=\"5\" y=\"{:.3f}\" font-size=\"10\">{:.4g}</text>\n", py(v_lo), v_lo);
  out << "</svg>\n";
}

}  // namespace cptq
