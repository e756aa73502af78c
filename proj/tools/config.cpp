#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "fnlab/error.hpp"
#include "fnlab/json_util.hpp"
#include "fnlab/operator.hpp"

namespace fnlab::cli {

using json = nlohmann::ordered_json;

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"solve",     "continuation", "poisson-h",
                                                 "check-cone", "lemma-border", "diagnose"};
  return names;
}

namespace {

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : sep) + s;
  return out;
}

std::string child(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Collects every problem found while walking the document.
class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& message) { errors.push_back(path + ": " + message); }

  bool object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    fail(path, "expected an object");
    return false;
  }

  void only(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) return;
    for (auto it = j.begin(); it != j.end(); ++it) {
      const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; });
      if (!known) {
        std::vector<std::string> names(allowed.begin(), allowed.end());
        fail(child(path, it.key()), "unknown key (allowed: " + join(names, ", ") + ")");
      }
    }
  }

  const json* find(const json& j, const char* key) const {
    if (!j.is_object() || !j.contains(key)) return nullptr;
    return &j.at(key);
  }

  std::optional<double> number(const json& j, const std::string& path, const char* key, bool required) {
    const json* v = find(j, key);
    if (!v) {
      if (required) fail(child(path, key), "required number is missing");
      return std::nullopt;
    }
    if (!v->is_number()) {
      fail(child(path, key), "expected a number");
      return std::nullopt;
    }
    return v->get<double>();
  }

  std::optional<long long> integer(const json& j, const std::string& path, const char* key, bool required) {
    const json* v = find(j, key);
    if (!v) {
      if (required) fail(child(path, key), "required integer is missing");
      return std::nullopt;
    }
    if (!v->is_number_integer()) {
      fail(child(path, key), "expected an integer");
      return std::nullopt;
    }
    return v->get<long long>();
  }

  std::optional<std::string> string(const json& j, const std::string& path, const char* key, bool required) {
    const json* v = find(j, key);
    if (!v) {
      if (required) fail(child(path, key), "required string is missing");
      return std::nullopt;
    }
    if (!v->is_string()) {
      fail(child(path, key), "expected a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<Vec> vector(const json& j, const std::string& path, const char* key, bool required) {
    const json* v = find(j, key);
    if (!v) {
      if (required) fail(child(path, key), "required array is missing");
      return std::nullopt;
    }
    if (!v->is_array() || !std::all_of(v->begin(), v->end(), [](const json& e) { return e.is_number(); })) {
      fail(child(path, key), "expected an array of numbers");
      return std::nullopt;
    }
    Vec out(static_cast<Eigen::Index>(v->size()));
    for (std::size_t i = 0; i < v->size(); ++i) out(static_cast<Eigen::Index>(i)) = (*v)[i].get<double>();
    return out;
  }

  std::optional<Mat> matrix(const json& j, const std::string& path, const char* key) {
    const json* v = find(j, key);
    if (!v) {
      fail(child(path, key), "required matrix is missing");
      return std::nullopt;
    }
    if (!v->is_array() || v->empty()) {
      fail(child(path, key), "expected a nonempty array of rows");
      return std::nullopt;
    }
    const std::size_t cols = (*v)[0].is_array() ? (*v)[0].size() : 0;
    Mat out(static_cast<Eigen::Index>(v->size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < v->size(); ++r) {
      const json& row = (*v)[r];
      if (!row.is_array() || row.size() != cols ||
          !std::all_of(row.begin(), row.end(), [](const json& e) { return e.is_number(); })) {
        fail(child(path, key), "rows must be numeric arrays of equal length");
        return std::nullopt;
      }
      for (std::size_t c = 0; c < cols; ++c)
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
    }
    return out;
  }

  // Runs a constructor that may throw VALIDATION_ERROR and records the message.
  template <class F>
  auto guard(const std::string& path, F&& f) -> std::optional<decltype(f())> {
    try {
      return f();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::IoError) throw;
      const std::string text = e.what();
      const std::size_t prefix = to_string(e.code()).size() + 2;
      fail(path, text.size() > prefix ? text.substr(prefix) : text);
    }
    return std::nullopt;
  }
};

std::optional<Expression> parse_expression(Reader& rd, const json& j, const std::string& path) {
  if (j.is_number()) return Expression::constant(j.get<double>());
  if (!rd.object(j, path)) return std::nullopt;
  const auto kind = rd.string(j, path, "kind", true);
  if (!kind) return std::nullopt;
  if (*kind == "constant") {
    rd.only(j, path, {"kind", "value"});
    const auto v = rd.number(j, path, "value", true);
    if (v) return Expression::constant(*v);
  } else if (*kind == "affine") {
    rd.only(j, path, {"kind", "coefficients", "offset"});
    const auto b = rd.vector(j, path, "coefficients", true);
    const double c = rd.number(j, path, "offset", false).value_or(0.0);
    if (b) return Expression::affine(*b, c);
  } else if (*kind == "quadratic_form") {
    rd.only(j, path, {"kind", "matrix", "linear", "offset"});
    const auto m = rd.matrix(j, path, "matrix");
    const auto b = rd.vector(j, path, "linear", false);
    const double c = rd.number(j, path, "offset", false).value_or(0.0);
    if (m) return rd.guard(path, [&] { return Expression::quadratic_form(*m, b.value_or(Vec()), c); });
  } else if (*kind == "radial_power") {
    rd.only(j, path, {"kind", "coefficient", "power", "offset", "center"});
    const auto a = rd.number(j, path, "coefficient", true);
    const auto p = rd.number(j, path, "power", true);
    const double c = rd.number(j, path, "offset", false).value_or(0.0);
    const auto center = rd.vector(j, path, "center", false);
    if (a && p) return Expression::radial_power(*a, *p, c, center.value_or(Vec()));
  } else if (*kind == "radial_polynomial") {
    rd.only(j, path, {"kind", "coefficients", "center"});
    const auto coeff = rd.vector(j, path, "coefficients", true);
    const auto center = rd.vector(j, path, "center", false);
    if (coeff) return Expression::radial_polynomial(*coeff, center.value_or(Vec()));
  } else if (*kind == "csv") {
    rd.only(j, path, {"kind", "path"});
    const auto file = rd.string(j, path, "path", true);
    if (file) return read_csv_expression(*file);
  } else {
    rd.fail(child(path, "kind"), "unknown expression '" + *kind + "' (available: " + join(expression_catalog(), ", ") + ")");
  }
  return std::nullopt;
}

std::optional<DomainSpec> parse_domain(Reader& rd, const json& j, const std::string& path) {
  if (!rd.object(j, path)) return std::nullopt;
  const auto kind = rd.string(j, path, "kind", true);
  if (!kind) return std::nullopt;
  if (*kind == "disk") {
    rd.only(j, path, {"kind", "dimension", "radius", "center"});
    const long long n = rd.integer(j, path, "dimension", false).value_or(2);
    const double r = rd.number(j, path, "radius", false).value_or(1.0);
    const auto center = rd.vector(j, path, "center", false);
    if (n < 2 || n > 3) {
      rd.fail(child(path, "dimension"), "must be 2 or 3");
      return std::nullopt;
    }
    if (center && center->size() != n) {
      rd.fail(child(path, "center"), "length must equal the dimension");
      return std::nullopt;
    }
    if (!(r > 0.0)) {
      rd.fail(child(path, "radius"), "must be positive");
      return std::nullopt;
    }
    return DomainSpec::disk(static_cast<int>(n), r, center.value_or(Vec::Zero(n)));
  }
  if (*kind == "annulus") {
    rd.only(j, path, {"kind", "inner_radius", "outer_radius", "center"});
    const auto r0 = rd.number(j, path, "inner_radius", true);
    const auto r1 = rd.number(j, path, "outer_radius", true);
    const auto center = rd.vector(j, path, "center", false);
    if (!r0 || !r1) return std::nullopt;
    if (!(*r0 > 0.0 && *r1 > *r0)) {
      rd.fail(path, "radii must satisfy 0 < inner_radius < outer_radius");
      return std::nullopt;
    }
    return DomainSpec::annulus(*r0, *r1, center.value_or(Vec::Zero(2)));
  }
  if (*kind == "box" || *kind == "rounded_box") {
    if (*kind == "box") {
      rd.only(j, path, {"kind", "lower", "upper", "periodic"});
    } else {
      rd.only(j, path, {"kind", "lower", "upper", "corner_radius"});
    }
    const auto lo = rd.vector(j, path, "lower", true);
    const auto hi = rd.vector(j, path, "upper", true);
    if (!lo || !hi) return std::nullopt;
    if (lo->size() != hi->size() || lo->size() < 2 || lo->size() > 3 || !((*hi - *lo).minCoeff() > 0.0)) {
      rd.fail(path, "lower and upper must have equal length 2 or 3 with lower < upper");
      return std::nullopt;
    }
    if (*kind == "rounded_box") {
      const auto rc = rd.number(j, path, "corner_radius", true);
      if (!rc) return std::nullopt;
      return rd.guard(path, [&] { return DomainSpec::rounded_box(*lo, *hi, *rc); });
    }
    std::vector<bool> periodic(static_cast<std::size_t>(lo->size()), false);
    if (const json* p = rd.find(j, "periodic")) {
      if (!p->is_array() || p->size() != periodic.size() ||
          !std::all_of(p->begin(), p->end(), [](const json& e) { return e.is_boolean(); })) {
        rd.fail(child(path, "periodic"), "expected one boolean per axis");
        return std::nullopt;
      }
      for (std::size_t i = 0; i < periodic.size(); ++i) periodic[i] = (*p)[i].get<bool>();
    }
    return rd.guard(path, [&] { return DomainSpec::box(*lo, *hi, periodic); });
  }
  rd.fail(child(path, "kind"), "unknown domain '" + *kind + "' (available: disk, annulus, box, rounded_box)");
  return std::nullopt;
}

json domain_json(const DomainSpec& d) {
  json j;
  j["kind"] = d.name();
  switch (d.kind()) {
    case DomainKind::Disk:
      j["dimension"] = d.dimension();
      j["radius"] = d.radius();
      j["center"] = json_vector(d.center());
      break;
    case DomainKind::Annulus:
      j["inner_radius"] = d.inner_radius();
      j["outer_radius"] = d.radius();
      j["center"] = json_vector(d.center());
      break;
    case DomainKind::Box: {
      j["lower"] = json_vector(d.lower());
      j["upper"] = json_vector(d.upper());
      auto p = json::array();
      for (int i = 0; i < d.dimension(); ++i) p.push_back(d.is_periodic(i));
      j["periodic"] = p;
      break;
    }
    case DomainKind::RoundedBox:
      j["lower"] = json_vector(d.lower());
      j["upper"] = json_vector(d.upper());
      j["corner_radius"] = d.corner_radius();
      break;
  }
  return j;
}

bool needs_grid(const std::string& command) {
  return command == "solve" || command == "continuation" || command == "poisson-h" || command == "diagnose";
}

void parse_problem(Reader& rd, const json& j, const std::string& command, ProblemConfig& p) {
  const std::string path = "problem";
  if (!rd.object(j, path)) return;
  rd.only(j, path, {"domain", "chart", "spacing", "angular_count", "metric", "chi", "operator", "psi", "phi",
                    "subsolution", "exact"});
  const bool grid = needs_grid(command);
  const bool nonlinear = grid && command != "poisson-h";

  if (const json* d = rd.find(j, "domain")) {
    p.domain = parse_domain(rd, *d, child(path, "domain"));
  } else if (grid) {
    rd.fail(child(path, "domain"), "required for command " + command);
  }
  if (const auto chart = rd.string(j, path, "chart", false)) {
    if (*chart == "cartesian") {
      p.chart = ChartKind::Cartesian;
    } else if (*chart == "polar") {
      p.chart = ChartKind::Polar;
    } else {
      rd.fail(child(path, "chart"), "expected 'cartesian' or 'polar'");
    }
  }
  if (const auto h = rd.number(j, path, "spacing", grid)) {
    if (!(*h > 0.0)) rd.fail(child(path, "spacing"), "must be positive");
    p.spacing = *h;
  }
  if (const auto m = rd.integer(j, path, "angular_count", false)) {
    if (*m != 0 && (*m < 8 || *m % 4 != 0)) rd.fail(child(path, "angular_count"), "must be 0 or a multiple of 4 that is at least 8");
    p.angular_count = static_cast<int>(*m);
  }

  if (const json* m = rd.find(j, "metric")) {
    const std::string mp = child(path, "metric");
    if (rd.object(*m, mp)) {
      rd.only(*m, mp, {"kind", "strength", "origin"});
      const auto kind = rd.string(*m, mp, "kind", true);
      if (kind && *kind == "flat") {
        p.metric = MetricPreset::flat();
      } else if (kind && *kind == "conformal") {
        const auto c = rd.number(*m, mp, "strength", true);
        const auto origin = rd.vector(*m, mp, "origin", false);
        if (c) p.metric = MetricPreset::conformal(*c, origin.value_or(Vec()));
      } else if (kind) {
        rd.fail(child(mp, "kind"), "unknown metric '" + *kind + "' (available: flat, conformal)");
      }
    }
  }
  if (const json* c = rd.find(j, "chi")) {
    const std::string cp = child(path, "chi");
    if (rd.object(*c, cp)) {
      rd.only(*c, cp, {"metric_multiple"});
      p.chi = ChiPreset::scaled_metric(rd.number(*c, cp, "metric_multiple", true).value_or(0.0));
    }
  }

  if (const json* o = rd.find(j, "operator")) {
    const std::string op = child(path, "operator");
    if (rd.object(*o, op)) {
      rd.only(*o, op, {"name", "k", "dimension"});
      p.operator_name = rd.string(*o, op, "name", true).value_or("");
      p.operator_k = static_cast<int>(rd.integer(*o, op, "k", false).value_or(0));
      p.operator_dimension = static_cast<int>(rd.integer(*o, op, "dimension", false).value_or(0));
      const auto& zoo = operator_zoo_names();
      if (!p.operator_name.empty() && std::find(zoo.begin(), zoo.end(), p.operator_name) == zoo.end()) {
        rd.fail(child(op, "name"), "unknown operator '" + p.operator_name + "' (available: " + join(zoo, ", ") + ")");
      }
    }
  } else if (nonlinear || command == "check-cone") {
    rd.fail(child(path, "operator"), "required for command " + command);
  }

  auto expr = [&](const char* key, bool required) -> std::optional<Expression> {
    if (const json* e = rd.find(j, key)) return parse_expression(rd, *e, child(path, key));
    if (required) rd.fail(child(path, key), "required for command " + command);
    return std::nullopt;
  };
  p.psi = expr("psi", nonlinear);
  p.phi = expr("phi", grid);
  if (const json* s = rd.find(j, "subsolution")) {
    if (!(s->is_string() && s->get<std::string>() == "generate")) {
      p.subsolution = parse_expression(rd, *s, child(path, "subsolution"));
    }
  }
  p.exact = expr("exact", false);
}

void parse_schedule(Reader& rd, const json& j, ScheduleConfig& s) {
  const std::string path = "schedule";
  if (!rd.object(j, path)) return;
  s.present = true;
  rd.only(j, path, {"epsilons", "initial", "levels", "step_tolerance", "min_epsilon", "stagnation"});
  if (const auto eps = rd.vector(j, path, "epsilons", false)) {
    s.epsilons.assign(eps->data(), eps->data() + eps->size());
    if (rd.find(j, "initial") || rd.find(j, "levels")) {
      rd.fail(path, "give either epsilons or initial/levels, not both");
    }
  }
  if (const json* init = rd.find(j, "initial")) {
    if (init->is_string() && init->get<std::string>() == "auto") {
      s.initial.reset();
    } else if (init->is_number()) {
      s.initial = init->get<double>();
    } else {
      rd.fail(child(path, "initial"), "expected a number or \"auto\"");
    }
  }
  if (const auto levels = rd.integer(j, path, "levels", false)) {
    if (*levels < 1 || *levels > 60) rd.fail(child(path, "levels"), "must be between 1 and 60");
    s.levels = static_cast<int>(*levels);
  }
  s.step_tolerance = rd.number(j, path, "step_tolerance", false).value_or(s.step_tolerance);
  s.min_epsilon = rd.number(j, path, "min_epsilon", false).value_or(s.min_epsilon);
  s.stagnation = rd.number(j, path, "stagnation", false).value_or(s.stagnation);

  ContinuationSchedule check;
  check.epsilons = s.epsilons;
  if (check.epsilons.empty()) {
    if (s.initial && !(*s.initial > 0.0)) rd.fail(child(path, "initial"), "must be positive");
    check = geometric_schedule(s.initial.value_or(1.0), s.levels);
  }
  check.step_tolerance = s.step_tolerance;
  check.min_epsilon = s.min_epsilon;
  check.stagnation = s.stagnation;
  rd.guard(path, [&] {
    check.validate();
    return 0;
  });
}

void cross_checks(Reader& rd, RunConfig& c) {
  ProblemConfig& p = c.problem;
  if (p.domain && p.spacing > 0.0 && p.chart == ChartKind::Polar &&
      !(p.domain->dimension() == 2 &&
        (p.domain->kind() == DomainKind::Disk || p.domain->kind() == DomainKind::Annulus))) {
    rd.fail("problem.chart", "the polar chart needs a planar disk or annulus");
  }
  const auto& zoo = operator_zoo_names();
  if (!p.operator_name.empty() && std::find(zoo.begin(), zoo.end(), p.operator_name) != zoo.end()) {
    int n = p.operator_dimension;
    if (n == 0 && p.domain) n = p.domain->dimension();
    if (n == 0) {
      rd.fail("problem.operator.dimension", "required when no domain is given");
    } else if (p.domain && n != p.domain->dimension()) {
      rd.fail("problem.operator.dimension", "must match the domain dimension");
    } else {
      p.operator_dimension = n;
      rd.guard("problem.operator", [&] { return make_operator(p.operator_name, n, p.operator_k); });
    }
  }
}

}  // namespace

Expression read_csv_expression(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open csv field " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, path + ":1: empty csv file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const bool ok_header = (header.size() == 3 || header.size() == 4) && header.back() == "value";
  if (!ok_header) throw Error(ErrorCode::ParseError, path + ":1: header must be x,y[,z],value");
  std::vector<Vec> points;
  std::vector<double> values;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": not a number: " + cell);
      }
    }
    if (row.size() != header.size()) {
      throw Error(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": wrong column count");
    }
    Vec x(static_cast<Eigen::Index>(row.size() - 1));
    for (std::size_t i = 0; i + 1 < row.size(); ++i) x(static_cast<Eigen::Index>(i)) = row[i];
    points.push_back(x);
    values.push_back(row.back());
  }
  return Expression::table(std::move(points), std::move(values), path);
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(column) +
                                           ": " + e.what());
  }

  Reader rd;
  RunConfig c;
  if (!rd.object(doc, "config")) throw Error(ErrorCode::ValidationError, join(rd.errors, "; "));
  rd.only(doc, "", {"config_version", "command", "seed", "output_dir", "problem", "solver", "schedule",
                    "check_cone", "lemma_border", "diagnose"});

  const auto version = rd.integer(doc, "", "config_version", true);
  if (version && *version != kConfigVersion) {
    rd.fail("config_version", "unsupported version " + std::to_string(*version) + " (expected " +
                                  std::to_string(kConfigVersion) + ")");
  }
  c.command = rd.string(doc, "", "command", true).value_or("");
  const auto& cmds = command_names();
  if (!c.command.empty() && std::find(cmds.begin(), cmds.end(), c.command) == cmds.end()) {
    rd.fail("command", "unknown command '" + c.command + "' (available: " + join(cmds, ", ") + ")");
  }
  if (const auto seed = rd.integer(doc, "", "seed", false)) {
    if (*seed < 0) rd.fail("seed", "must be nonnegative");
    c.seed = static_cast<std::uint64_t>(*seed);
  }
  c.output_dir = rd.string(doc, "", "output_dir", false).value_or("");

  if (const json* p = rd.find(doc, "problem")) {
    parse_problem(rd, *p, c.command, c.problem);
  } else if (needs_grid(c.command) || c.command == "check-cone") {
    rd.fail("problem", "required for command " + c.command);
  }

  if (const json* s = rd.find(doc, "solver")) {
    if (rd.object(*s, "solver")) {
      rd.only(*s, "solver", {"tolerance", "max_iterations", "damping", "min_step"});
      c.solver.tolerance = rd.number(*s, "solver", "tolerance", false).value_or(c.solver.tolerance);
      c.solver.max_iterations =
          static_cast<int>(rd.integer(*s, "solver", "max_iterations", false).value_or(c.solver.max_iterations));
      c.solver.damping = rd.number(*s, "solver", "damping", false).value_or(c.solver.damping);
      c.solver.min_step = rd.number(*s, "solver", "min_step", false).value_or(c.solver.min_step);
      if (!(c.solver.tolerance > 0.0)) rd.fail("solver.tolerance", "must be positive");
      if (c.solver.max_iterations < 1) rd.fail("solver.max_iterations", "must be at least 1");
      if (!(c.solver.damping > 0.0 && c.solver.damping <= 1.0)) rd.fail("solver.damping", "must lie in (0, 1]");
      if (!(c.solver.min_step > 0.0 && c.solver.min_step < 1.0)) rd.fail("solver.min_step", "must lie in (0, 1)");
    }
  }

  if (const json* s = rd.find(doc, "schedule")) parse_schedule(rd, *s, c.schedule);

  if (const json* k = rd.find(doc, "check_cone")) {
    if (rd.object(*k, "check_cone")) {
      rd.only(*k, "check_cone", {"samples"});
      c.check_samples = static_cast<int>(rd.integer(*k, "check_cone", "samples", false).value_or(c.check_samples));
      if (c.check_samples < 1) rd.fail("check_cone.samples", "must be positive");
    }
  }

  if (const json* l = rd.find(doc, "lemma_border")) {
    if (rd.object(*l, "lemma_border")) {
      rd.only(*l, "lemma_border", {"diagonal", "border", "epsilon", "corner"});
      c.lemma.diagonal = rd.vector(*l, "lemma_border", "diagonal", true).value_or(Vec());
      c.lemma.border = rd.vector(*l, "lemma_border", "border", true).value_or(Vec());
      c.lemma.epsilon = rd.number(*l, "lemma_border", "epsilon", true).value_or(0.0);
      c.lemma.corner = rd.number(*l, "lemma_border", "corner", false);
      if (c.lemma.diagonal.size() != c.lemma.border.size() || c.lemma.diagonal.size() == 0) {
        rd.fail("lemma_border", "diagonal and border must be nonempty and of equal length");
      }
      if (!(c.lemma.epsilon > 0.0)) rd.fail("lemma_border.epsilon", "must be positive");
    }
  } else if (c.command == "lemma-border") {
    rd.fail("lemma_border", "required for command lemma-border");
  }

  if (const json* d = rd.find(doc, "diagnose")) {
    if (rd.object(*d, "diagnose")) {
      rd.only(*d, "diagnose", {"audit_samples", "collar_radius", "anchor"});
      c.diagnose.audit_samples =
          static_cast<int>(rd.integer(*d, "diagnose", "audit_samples", false).value_or(c.diagnose.audit_samples));
      c.diagnose.collar_radius = rd.number(*d, "diagnose", "collar_radius", false).value_or(c.diagnose.collar_radius);
      c.diagnose.anchor = static_cast<int>(rd.integer(*d, "diagnose", "anchor", false).value_or(c.diagnose.anchor));
      if (c.diagnose.audit_samples < 1) rd.fail("diagnose.audit_samples", "must be positive");
      if (!(c.diagnose.collar_radius > 0.0)) rd.fail("diagnose.collar_radius", "must be positive");
      if (c.diagnose.anchor < 0) rd.fail("diagnose.anchor", "must be nonnegative");
    }
  }

  cross_checks(rd, c);
  if (!rd.errors.empty()) throw Error(ErrorCode::ValidationError, join(rd.errors, "; "));
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

json resolved_config(const RunConfig& c) {
  json j;
  j["config_version"] = c.config_version;
  j["command"] = c.command;
  j["seed"] = c.seed;
  if (!c.output_dir.empty()) j["output_dir"] = c.output_dir;

  const ProblemConfig& p = c.problem;
  json prob = json::object();
  if (p.domain) prob["domain"] = domain_json(*p.domain);
  if (p.spacing > 0.0) {
    prob["chart"] = p.chart == ChartKind::Polar ? "polar" : "cartesian";
    prob["spacing"] = p.spacing;
    prob["angular_count"] = p.angular_count;
  }
  json metric;
  metric["kind"] = p.metric.kind == MetricKind::Flat ? "flat" : "conformal";
  if (p.metric.kind == MetricKind::Conformal) {
    metric["strength"] = p.metric.strength;
    if (p.metric.origin.size() > 0) metric["origin"] = json_vector(p.metric.origin);
  }
  prob["metric"] = metric;
  prob["chi"] = json{{"metric_multiple", p.chi.metric_multiple}};
  if (!p.operator_name.empty()) {
    json op;
    op["name"] = p.operator_name;
    if (p.operator_name == "sigma_k") op["k"] = p.operator_k;
    op["dimension"] = p.operator_dimension;
    prob["operator"] = op;
  }
  if (p.psi) prob["psi"] = p.psi->to_json();
  if (p.phi) prob["phi"] = p.phi->to_json();
  if (p.spacing > 0.0) prob["subsolution"] = p.subsolution ? p.subsolution->to_json() : json("generate");
  if (p.exact) prob["exact"] = p.exact->to_json();
  j["problem"] = prob;

  j["solver"] = json{{"tolerance", c.solver.tolerance},
                     {"max_iterations", c.solver.max_iterations},
                     {"damping", c.solver.damping},
                     {"min_step", c.solver.min_step}};
  if (c.schedule.present) {
    json s;
    if (!c.schedule.epsilons.empty()) {
      s["epsilons"] = c.schedule.epsilons;
    } else {
      s["initial"] = c.schedule.initial ? json(*c.schedule.initial) : json("auto");
      s["levels"] = c.schedule.levels;
    }
    s["step_tolerance"] = c.schedule.step_tolerance;
    s["min_epsilon"] = c.schedule.min_epsilon;
    s["stagnation"] = c.schedule.stagnation;
    j["schedule"] = s;
  }
  if (c.command == "check-cone") j["check_cone"] = json{{"samples", c.check_samples}};
  if (c.command == "lemma-border") {
    json l;
    l["diagonal"] = json_vector(c.lemma.diagonal);
    l["border"] = json_vector(c.lemma.border);
    l["epsilon"] = c.lemma.epsilon;
    if (c.lemma.corner) l["corner"] = *c.lemma.corner;
    j["lemma_border"] = l;
  }
  if (c.command == "diagnose") {
    j["diagnose"] = json{{"audit_samples", c.diagnose.audit_samples},
                         {"collar_radius", c.diagnose.collar_radius},
                         {"anchor", c.diagnose.anchor}};
  }
  return j;
}

}  // namespace fnlab::cli
