#pragma once

// Mamdani fuzzy inference: trapezoidal fuzzification, AND-as-min rule firing,
// clip-and-max aggregation, centre-of-gravity defuzzification.
//
// All linguistic variables share the universe [0, 100].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "modclust/detail/text.hpp"

namespace modclust::fuzzy {

inline constexpr double kUniverseMin = 0.0;
inline constexpr double kUniverseMax = 100.0;

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, std::optional<std::size_t> rule = std::nullopt)
      : std::runtime_error(what), rule_(rule) {}

  /// Zero-based index of the offending rule, when the error concerns one.
  std::optional<std::size_t> rule() const noexcept { return rule_; }

 private:
  std::optional<std::size_t> rule_;
};

/// Trapezoid with feet `a`, `d` and shoulders `b`, `c`; a <= b <= c <= d inside the universe.
struct Trapezoid {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  static Trapezoid make(double a, double b, double c, double d) {
    for (double v : {a, b, c, d})
      if (!std::isfinite(v)) throw ConfigError("trapezoid breakpoint is not finite");
    if (!(a <= b && b <= c && c <= d)) throw ConfigError("trapezoid not monotone (need a <= b <= c <= d)");
    if (a < kUniverseMin || d > kUniverseMax) throw ConfigError("trapezoid outside universe [0, 100]");
    return {a, b, c, d};
  }

  friend bool operator==(const Trapezoid&, const Trapezoid&) = default;
};

/// Degree of membership of `x` (clamped to the universe). Vertical edges
/// (a == b or c == d) count the shoulder point itself as fully inside.
constexpr double membership(const Trapezoid& t, double x) noexcept {
  x = std::clamp(x, kUniverseMin, kUniverseMax);
  if (x < t.a || x > t.d) return 0.0;
  if (x >= t.b && x <= t.c) return 1.0;
  if (x < t.b) return (x - t.a) / (t.b - t.a);
  return (t.d - x) / (t.d - t.c);
}

struct Term {
  std::string name;
  Trapezoid shape;
};

struct LinguisticVariable {
  std::string name;
  std::vector<Term> terms;

  std::optional<std::size_t> find_term(std::string_view term) const {
    for (std::size_t i = 0; i < terms.size(); ++i)
      if (terms[i].name == term) return i;
    return std::nullopt;
  }
};

struct Clause {
  std::string variable;
  std::string term;

  friend bool operator==(const Clause&, const Clause&) = default;
};

/// IF <antecedents joined by AND> THEN <consequent>.
struct FuzzyRule {
  std::vector<Clause> antecedents;
  Clause consequent;
};

using InputMap = std::map<std::string, double, std::less<>>;

/// Immutable, validated Mamdani system. Safe to share across threads.
class FuzzySystem {
 public:
  static FuzzySystem create(std::vector<LinguisticVariable> inputs, LinguisticVariable output,
                            std::vector<FuzzyRule> rules, double cog_step = 0.1) {
    FuzzySystem sys;
    sys.inputs_ = std::move(inputs);
    sys.output_ = std::move(output);
    sys.rules_ = std::move(rules);
    sys.cog_step_ = cog_step;
    sys.validate_and_resolve();
    return sys;
  }

  const std::vector<LinguisticVariable>& inputs() const noexcept { return inputs_; }
  const LinguisticVariable& output() const noexcept { return output_; }
  const std::vector<FuzzyRule>& rules() const noexcept { return rules_; }
  double cog_step() const noexcept { return cog_step_; }

  std::optional<std::size_t> find_input(std::string_view name) const {
    for (std::size_t i = 0; i < inputs_.size(); ++i)
      if (inputs_[i].name == name) return i;
    return std::nullopt;
  }

  /// Consequent shape of rule `r`.
  const Trapezoid& consequent_shape(std::size_t r) const { return output_.terms[resolved_[r].consequent].shape; }

  /// Antecedent shapes of rule `r`, paired with the input index they read.
  std::vector<std::pair<std::size_t, const Trapezoid*>> antecedent_shapes(std::size_t r) const {
    std::vector<std::pair<std::size_t, const Trapezoid*>> out;
    for (const auto& [var, term] : resolved_[r].antecedents) out.emplace_back(var, &inputs_[var].terms[term].shape);
    return out;
  }

 private:
  struct ResolvedRule {
    std::vector<std::pair<std::size_t, std::size_t>> antecedents;  // (input, term)
    std::size_t consequent = 0;
  };

  static void check_variable(const LinguisticVariable& v) {
    if (v.name.empty()) throw ConfigError("variable with empty name");
    if (v.terms.empty()) throw ConfigError("variable '" + v.name + "' has no terms");
    for (std::size_t i = 0; i < v.terms.size(); ++i) {
      const auto& t = v.terms[i].shape;
      Trapezoid::make(t.a, t.b, t.c, t.d);
      for (std::size_t j = 0; j < i; ++j)
        if (v.terms[j].name == v.terms[i].name)
          throw ConfigError("variable '" + v.name + "' declares term '" + v.terms[i].name + "' twice");
    }
  }

  void validate_and_resolve() {
    if (!(cog_step_ > 0.0) || !std::isfinite(cog_step_)) throw ConfigError("cog_step must be positive");
    if (inputs_.empty()) throw ConfigError("no input variables");
    for (std::size_t i = 0; i < inputs_.size(); ++i) {
      check_variable(inputs_[i]);
      for (std::size_t j = 0; j < i; ++j)
        if (inputs_[j].name == inputs_[i].name) throw ConfigError("input '" + inputs_[i].name + "' declared twice");
    }
    check_variable(output_);
    if (find_input(output_.name)) throw ConfigError("output '" + output_.name + "' clashes with an input");
    if (rules_.empty()) throw ConfigError("empty rule base");

    resolved_.clear();
    for (std::size_t r = 0; r < rules_.size(); ++r) {
      const auto& rule = rules_[r];
      const std::string tag = "rule " + std::to_string(r + 1);
      if (rule.antecedents.empty()) throw ConfigError(tag + ": no antecedents", r);
      ResolvedRule rr;
      for (const auto& clause : rule.antecedents) {
        auto var = find_input(clause.variable);
        if (!var) throw ConfigError(tag + ": unknown input variable '" + clause.variable + "'", r);
        auto term = inputs_[*var].find_term(clause.term);
        if (!term) throw ConfigError(tag + ": unknown term '" + clause.term + "' of '" + clause.variable + "'", r);
        rr.antecedents.emplace_back(*var, *term);
      }
      if (rule.consequent.variable != output_.name)
        throw ConfigError(tag + ": consequent must name output '" + output_.name + "'", r);
      auto term = output_.find_term(rule.consequent.term);
      if (!term)
        throw ConfigError(tag + ": unknown term '" + rule.consequent.term + "' of '" + output_.name + "'", r);
      rr.consequent = *term;
      resolved_.push_back(std::move(rr));
    }
  }

  std::vector<LinguisticVariable> inputs_;
  LinguisticVariable output_;
  std::vector<FuzzyRule> rules_;
  double cog_step_ = 0.1;
  std::vector<ResolvedRule> resolved_;
};

/// Firing strength of `rule`: minimum antecedent membership.
inline double rule_activation(const FuzzySystem& sys, const FuzzyRule& rule, const InputMap& inputs) {
  double strength = 1.0;
  for (const auto& clause : rule.antecedents) {
    auto value = inputs.find(clause.variable);
    if (value == inputs.end()) throw std::invalid_argument("no value supplied for input '" + clause.variable + "'");
    auto var = sys.find_input(clause.variable);
    if (!var) throw std::invalid_argument("unknown input variable '" + clause.variable + "'");
    auto term = sys.inputs()[*var].find_term(clause.term);
    if (!term) throw std::invalid_argument("unknown term '" + clause.term + "'");
    strength = std::min(strength, membership(sys.inputs()[*var].terms[*term].shape, value->second));
  }
  return strength;
}

/// Centroid of the aggregate max_r min(activation_r, consequent_r(y)), by the
/// midpoint rule over [0, 100]. Empty when the aggregate has zero area.
inline std::optional<double> defuzzify_cog(const FuzzySystem& sys, std::span<const double> activations) {
  if (activations.size() != sys.rules().size())
    throw std::invalid_argument("activation count does not match rule count");
  const double span = kUniverseMax - kUniverseMin;
  const auto samples = static_cast<std::size_t>(std::max(1.0, std::ceil(span / sys.cog_step() - 1e-9)));
  const double h = span / static_cast<double>(samples);

  std::vector<std::pair<double, const Trapezoid*>> active;
  for (std::size_t r = 0; r < activations.size(); ++r)
    if (activations[r] > 0.0) active.emplace_back(std::min(activations[r], 1.0), &sys.consequent_shape(r));
  if (active.empty()) return std::nullopt;

  double area = 0.0;
  double moment = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double y = kUniverseMin + (static_cast<double>(k) + 0.5) * h;
    double g = 0.0;
    for (const auto& [level, shape] : active) g = std::max(g, std::min(level, membership(*shape, y)));
    area += g;
    moment += g * y;
  }
  if (area <= 0.0) return std::nullopt;
  return moment / area;
}

/// Full inference pass: fuzzify, fire every rule, aggregate, defuzzify.
inline std::optional<double> infer(const FuzzySystem& sys, const InputMap& inputs) {
  std::vector<double> activations;
  activations.reserve(sys.rules().size());
  for (std::size_t r = 0; r < sys.rules().size(); ++r) {
    double strength = 1.0;
    for (const auto& [var, shape] : sys.antecedent_shapes(r)) {
      auto value = inputs.find(sys.inputs()[var].name);
      if (value == inputs.end())
        throw std::invalid_argument("no value supplied for input '" + sys.inputs()[var].name + "'");
      strength = std::min(strength, membership(*shape, value->second));
    }
    activations.push_back(strength);
  }
  return defuzzify_cog(sys, activations);
}

inline constexpr std::string_view kQualityInput = "Qm";
inline constexpr std::string_view kIntensificationInput = "Im";
inline constexpr std::string_view kDiversificationInput = "Dm";

/// Phase-selection inference over the quality, intensification and
/// diversification measures.
inline std::optional<double> infer(const FuzzySystem& sys, double quality, double intensification,
                                   double diversification) {
  InputMap inputs;
  inputs.emplace(kQualityInput, quality);
  inputs.emplace(kIntensificationInput, intensification);
  inputs.emplace(kDiversificationInput, diversification);
  return infer(sys, inputs);
}

namespace detail_fis {

inline Clause parse_clause(const std::vector<std::string_view>& tok, std::size_t at, const std::string& where) {
  if (at + 2 >= tok.size()) throw ConfigError(where + ": truncated clause");
  if (!modclust::detail::iequals(tok[at + 1], "IS"))
    throw ConfigError(where + ": expected 'IS' after '" + std::string(tok[at]) + "'");
  return {std::string(tok[at]), std::string(tok[at + 2])};
}

inline FuzzyRule parse_rule(std::string_view line, const std::string& where) {
  const auto tok = modclust::detail::split_ws(line);
  if (tok.empty() || !modclust::detail::iequals(tok[0], "IF")) throw ConfigError(where + ": rule must start with IF");
  FuzzyRule rule;
  std::size_t at = 1;
  while (true) {
    if (at + 3 > tok.size()) throw ConfigError(where + ": truncated clause");
    rule.antecedents.push_back(parse_clause(tok, at, where));
    at += 3;
    if (at >= tok.size()) throw ConfigError(where + ": missing THEN");
    if (modclust::detail::iequals(tok[at], "AND")) {
      ++at;
      continue;
    }
    if (modclust::detail::iequals(tok[at], "THEN")) break;
    throw ConfigError(where + ": expected AND or THEN, got '" + std::string(tok[at]) + "'");
  }
  ++at;
  if (at + 3 != tok.size()) throw ConfigError(where + ": consequent must be '<output> IS <term>'");
  rule.consequent = parse_clause(tok, at, where);
  return rule;
}

}  // namespace detail_fis

/// Loads a system from the FIS text format:
///
///     [options]
///     cog_step = 0.1
///     [input Qm]
///     low  = 0 0 20 40
///     [output selection]
///     global = 0 0 30 50
///     [rules]
///     IF Qm IS low AND Dm IS low THEN selection IS global
///
/// Terms are `name = a b c d`. Keywords are case-insensitive; names are not.
inline FuzzySystem load_fis_config(std::string_view text) {
  enum class Section { none, options, input, output, rules };
  Section section = Section::none;
  std::vector<LinguisticVariable> inputs;
  std::optional<LinguisticVariable> output;
  std::vector<FuzzyRule> rules;
  std::vector<std::size_t> rule_lines;
  double cog_step = 0.1;

  for (const auto& line : modclust::detail::read_config_lines(text)) {
    const std::string where = "line " + std::to_string(line.number);
    if (line.kind == modclust::detail::ConfigLine::Kind::section) {
      const auto& s = line.section;
      if (s.size() == 1 && modclust::detail::iequals(s[0], "options")) {
        section = Section::options;
      } else if (s.size() == 1 && modclust::detail::iequals(s[0], "rules")) {
        section = Section::rules;
      } else if (s.size() == 2 && modclust::detail::iequals(s[0], "input")) {
        section = Section::input;
        inputs.push_back({std::string(s[1]), {}});
      } else if (s.size() == 2 && modclust::detail::iequals(s[0], "output")) {
        if (output) throw ConfigError(where + ": only one output variable is supported");
        section = Section::output;
        output = LinguisticVariable{std::string(s[1]), {}};
      } else {
        throw ConfigError(where + ": unknown section '" + std::string(line.text) + "'");
      }
      continue;
    }

    switch (section) {
      case Section::none:
        throw ConfigError(where + ": content before any section");
      case Section::options: {
        if (line.kind != modclust::detail::ConfigLine::Kind::assignment)
          throw ConfigError(where + ": expected 'key = value'");
        if (line.key != "cog_step") throw ConfigError(where + ": unknown option '" + std::string(line.key) + "'");
        auto v = modclust::detail::parse_double(line.value);
        if (!v) throw ConfigError(where + ": cog_step is not a number");
        cog_step = *v;
        break;
      }
      case Section::input:
      case Section::output: {
        if (line.kind != modclust::detail::ConfigLine::Kind::assignment)
          throw ConfigError(where + ": expected 'term = a b c d'");
        const auto nums = modclust::detail::split_ws(line.value);
        if (nums.size() != 4) throw ConfigError(where + ": trapezoid needs exactly 4 numbers");
        double p[4];
        for (int i = 0; i < 4; ++i) {
          auto v = modclust::detail::parse_double(nums[i]);
          if (!v) throw ConfigError(where + ": '" + std::string(nums[i]) + "' is not a number");
          p[i] = *v;
        }
        Trapezoid shape;
        try {
          shape = Trapezoid::make(p[0], p[1], p[2], p[3]);
        } catch (const ConfigError& e) {
          throw ConfigError(where + ": " + e.what());
        }
        auto& var = section == Section::input ? inputs.back() : *output;
        var.terms.push_back({std::string(line.key), shape});
        break;
      }
      case Section::rules:
        rules.push_back(detail_fis::parse_rule(line.text, where));
        rule_lines.push_back(line.number);
        break;
    }
  }
  if (!output) throw ConfigError("no [output ...] section");
  try {
    return FuzzySystem::create(std::move(inputs), std::move(*output), std::move(rules), cog_step);
  } catch (const ConfigError& e) {
    if (e.rule() && *e.rule() < rule_lines.size())
      throw ConfigError("line " + std::to_string(rule_lines[*e.rule()]) + ", " + e.what(), e.rule());
    throw;
  }
}

/// Shipped default phase-selection system: low quality or collapsed diversity
/// calls for the teacher phase (global), high quality near the incumbent for
/// the learner phase (local).
inline constexpr std::string_view kDefaultFisConfig = R"(# Default phase-selection system.
# Inputs are scaled to [0, 100]; output < 50 selects the teacher phase.

[options]
cog_step = 0.1

[input Qm]
low  = 0 0 20 40
high = 60 80 100 100

[input Im]
low  = 0 0 20 40
high = 60 80 100 100

[input Dm]
low  = 0 0 20 40
high = 60 80 100 100

[output selection]
global = 0 0 30 50
local  = 50 70 100 100

[rules]
IF Qm IS low THEN selection IS global
IF Qm IS high AND Im IS low THEN selection IS local
IF Dm IS low THEN selection IS global
IF Qm IS high AND Dm IS high THEN selection IS local
)";

inline FuzzySystem default_system() { return load_fis_config(kDefaultFisConfig); }

}  // namespace modclust::fuzzy
