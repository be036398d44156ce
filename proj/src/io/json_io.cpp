#include "dmc/io/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "dmc/errors.hpp"

namespace dmc::io {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    fail(ErrorKind::kConfig, std::string("missing key '") + key + "'");
  }
  return j.at(key);
}

double number(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number()) {
    fail(ErrorKind::kConfig, std::string("'") + key + "' must be a number");
  }
  return v.get<double>();
}

double number_or(const Json& j, const char* key, double fallback) {
  return j.contains(key) ? number(j, key) : fallback;
}

int integer_or(const Json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number_integer()) {
    fail(ErrorKind::kConfig, std::string("'") + key + "' must be an integer");
  }
  return v.get<int>();
}

std::string text_or(const Json& j, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_string()) {
    fail(ErrorKind::kConfig, std::string("'") + key + "' must be a string");
  }
  return v.get<std::string>();
}

std::vector<double> numbers(const Json& j, const std::string& what) {
  if (!j.is_array()) fail(ErrorKind::kConfig, what + " must be an array");
  std::vector<double> out;
  for (const Json& v : j) {
    if (!v.is_number()) fail(ErrorKind::kConfig, what + " must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<Mat> matrices(const Json& j, int dim, const std::string& what) {
  if (!j.is_array() || j.empty()) {
    fail(ErrorKind::kConfig, what + " must be a non-empty array of matrices");
  }
  std::vector<Mat> out;
  for (const Json& m : j) {
    Mat a = matrix_from_json(m, what);
    require(a.rows() == dim && a.cols() == dim, ErrorKind::kConfig,
            what + " entries must be " + std::to_string(dim) + " x " +
                std::to_string(dim));
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kConfig, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    fail(ErrorKind::kConfig, path + ": " + e.what());
  }
}

Mat matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    fail(ErrorKind::kConfig, what + " must be a non-empty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto row = numbers(j[static_cast<std::size_t>(r)], what);
    require(static_cast<Eigen::Index>(row.size()) == cols, ErrorKind::kConfig,
            what + " rows must have equal length");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

Vec vector_from_json(const Json& j, const std::string& what) {
  const auto v = numbers(j, what);
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Json to_json(const Mat& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

Json to_json(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

MemoryKernel kernel_from_json(const Json& j, int dim) {
  const std::string form = text_or(j, "form", "");
  if (form == "zero") return MemoryKernel::zero(dim);
  if (form == "constant") {
    Mat g = matrix_from_json(field(j, "matrix"), "kernel matrix");
    require(g.rows() == dim && g.cols() == dim, ErrorKind::kConfig,
            "constant kernel has the wrong dimension");
    return MemoryKernel::constant(std::move(g));
  }
  if (form == "exp_poly") {
    return MemoryKernel::exp_poly(number(j, "a"),
                                  matrices(field(j, "coeffs"), dim, "coeffs"));
  }
  if (form == "scalar_exp_poly") {
    return MemoryKernel::scalar_exp_poly(dim, number(j, "a"),
                                         numbers(field(j, "coeffs"), "coeffs"));
  }
  if (form == "sampled") {
    return MemoryKernel::sampled(number(j, "spacing"),
                                 matrices(field(j, "samples"), dim, "samples"));
  }
  fail(ErrorKind::kConfig, "unknown kernel form '" + form + "'");
}

Json kernel_to_json(const MemoryKernel& k) {
  using Form = MemoryKernel::Form;
  Json out;
  switch (k.form()) {
    case Form::kZero:
      out["form"] = "zero";
      break;
    case Form::kConstant:
      out["form"] = "constant";
      out["matrix"] = to_json(k.coeffs().front());
      break;
    case Form::kExpPoly: {
      out["form"] = "exp_poly";
      out["a"] = k.rate();
      Json c = Json::array();
      for (const Mat& m : k.coeffs()) c.push_back(to_json(m));
      out["coeffs"] = c;
      break;
    }
    case Form::kSampled: {
      out["form"] = "sampled";
      out["spacing"] = k.spacing();
      Json c = Json::array();
      for (const Mat& m : k.coeffs()) c.push_back(to_json(m));
      out["samples"] = c;
      break;
    }
  }
  return out;
}

HistoryFunction history_from_json(const Json& j, int dim, const TimeGrid& grid) {
  const std::string kind = text_or(j, "kind", "");
  auto value = [&](const char* key) {
    Vec v = vector_from_json(field(j, key), std::string("history ") + key);
    require(v.size() == dim, ErrorKind::kConfig,
            std::string("history ") + key + " has the wrong dimension");
    return v;
  };
  if (kind == "zero") return HistoryFunction::zero(dim, grid);
  if (kind == "constant") return HistoryFunction::constant(value("value"), grid);
  if (kind == "pulse") return HistoryFunction::pulse(value("value"), grid);
  if (kind == "affine") {
    const Vec c0 = value("value");
    const Vec c1 = value("slope");
    return HistoryFunction::from_function(
        dim, grid, [&](double theta) -> Vec { return c0 + theta * c1; });
  }
  if (kind == "samples") {
    Mat rows = matrix_from_json(field(j, "values"), "history values");
    require(rows.cols() == dim && rows.rows() == grid.delay_steps + 1,
            ErrorKind::kConfig, "history samples must be (delay_steps+1) x n");
    return HistoryFunction(rows.transpose(), grid.dt);
  }
  fail(ErrorKind::kConfig, "unknown history kind '" + kind + "'");
}

Problem problem_from_json(const Json& j) {
  Problem p;
  p.source = j;
  DelaySystem& s = p.system;
  s.A = matrix_from_json(field(j, "A"), "A");
  const auto n = static_cast<int>(s.A.rows());
  s.A1 = j.contains("A1") ? matrix_from_json(j.at("A1"), "A1") : Mat::Zero(n, n);
  s.M = j.contains("M") ? kernel_from_json(j.at("M"), n) : MemoryKernel::zero(n);
  s.Mtilde = j.contains("Mtilde") ? kernel_from_json(j.at("Mtilde"), n)
                                  : MemoryKernel::zero(n);
  s.B = ControlMap::constant(matrix_from_json(field(j, "B"), "B"));
  s.h = number(j, "h");
  s.T = number(j, "T");
  const int nt = integer_or(j, "nt", 0);
  require(nt > 0, ErrorKind::kConfig, "'nt' must be a positive integer");
  require(s.h > 0.0, ErrorKind::kConfig, "delay h must be positive");
  require(s.T > s.h, ErrorKind::kWindow, "horizon T must exceed the delay h");
  p.grid = s.grid(nt);
  s.history = j.contains("history") ? history_from_json(j.at("history"), n, p.grid)
                                    : HistoryFunction::zero(n, p.grid);
  s.validate(p.grid);
  return p;
}

NodeSignal control_from_json(const Json& j, int m, const TimeGrid& grid) {
  const int N = grid.n_steps;
  const std::string kind = text_or(j, "kind", "zero");
  NodeSignal u = NodeSignal::Zero(m, N + 1);
  auto vec = [&](const char* key) {
    Vec v = vector_from_json(field(j, key), std::string("control ") + key);
    require(v.size() == m, ErrorKind::kConfig,
            std::string("control ") + key + " must have m entries");
    return v;
  };
  if (kind == "zero") return u;
  if (kind == "constant") {
    const Vec v = vec("value");
    for (int k = 0; k <= N; ++k) u.col(k) = v;
    return u;
  }
  if (kind == "sine") {
    const Vec a = vec("a");
    const Vec b = vec("b");
    for (int k = 0; k <= N; ++k) {
      u.col(k) = a + std::sin(2.0 * std::numbers::pi * grid.time(k) / grid.horizon()) * b;
    }
    return u;
  }
  if (kind == "samples") {
    const Mat rows = matrix_from_json(field(j, "values"), "control values");
    require(rows.rows() == N + 1 && rows.cols() == m, ErrorKind::kConfig,
            "control samples must be (nt+1) x m");
    return rows.transpose();
  }
  fail(ErrorKind::kConfig, "unknown control kind '" + kind + "'");
}

SynthesisConfig synthesis_config_from_json(const Json& j) {
  SynthesisConfig c;
  if (j.is_null()) return c;
  c.rho = number_or(j, "rho", c.rho);
  c.growth = number_or(j, "growth", c.growth);
  c.tol = number_or(j, "tol", c.tol);
  c.max_outer = integer_or(j, "max_outer", c.max_outer);
  c.max_inner = integer_or(j, "max_inner", c.max_inner);
  c.theta_samples = integer_or(j, "theta_samples", c.theta_samples);
  c.seed = static_cast<std::uint64_t>(integer_or(j, "seed", 0));
  c.inner_tol = number_or(j, "inner_tol", c.inner_tol);
  const std::string method = text_or(j, "method", "auto");
  static const std::map<std::string, SynthesisMethod> kMethods{
      {"auto", SynthesisMethod::kAuto},
      {"direct", SynthesisMethod::kDirect},
      {"cg", SynthesisMethod::kConjugateGradient},
      {"gradient", SynthesisMethod::kGradientDescent}};
  const auto it = kMethods.find(method);
  if (it == kMethods.end()) fail(ErrorKind::kConfig, "unknown method '" + method + "'");
  c.method = it->second;
  if (j.contains("enforce")) {
    const Json& e = j.at("enforce");
    c.enforce.a = e.value("a", true);
    c.enforce.b = e.value("b", true);
    c.enforce.c = e.value("c", true);
  }
  c.validate();
  return c;
}

HeatConfig heat_config_from_json(const Json& j) {
  HeatConfig c;
  c.nx = integer_or(j, "nx", c.nx);
  c.nt = integer_or(j, "nt", c.nt);
  c.T = number_or(j, "T", c.T);
  c.h = number_or(j, "h", c.h);
  if (j.contains("kernel")) {
    const Json& k = j.at("kernel");
    const std::string form = text_or(k, "form", "");
    if (form == "zero") {
      c.kernel_coeffs.clear();
    } else if (form == "scalar_exp_poly") {
      c.kernel_rate = number(k, "a");
      c.kernel_coeffs = numbers(field(k, "coeffs"), "kernel coeffs");
    } else {
      fail(ErrorKind::kConfig, "heat kernel must be 'zero' or 'scalar_exp_poly'");
    }
  }
  const std::string op = text_or(j, "delay_operator", "identity");
  if (op == "identity") {
    c.delay_operator = DelayOperator::kIdentity;
  } else if (op == "laplacian") {
    c.delay_operator = DelayOperator::kLaplacian;
  } else {
    fail(ErrorKind::kConfig, "unknown delay_operator '" + op + "'");
  }
  if (j.contains("region")) {
    const Json& r = j.at("region");
    const std::string kind = text_or(r, "kind", "sweep");
    MovingRegion& g = c.region;
    if (kind == "sweep") {
      g.kind = MovingRegion::Kind::kSweep;
      g.width = number_or(r, "width", g.width);
    } else if (kind == "fixed" || kind == "flow") {
      g.kind = kind == "fixed" ? MovingRegion::Kind::kFixed : MovingRegion::Kind::kFlow;
      g.left = number(r, "left");
      g.right = number(r, "right");
      g.c0 = number_or(r, "c0", 0.0);
      g.c1 = number_or(r, "c1", 0.0);
      g.c2 = number_or(r, "c2", 0.0);
      g.flow_steps = integer_or(r, "steps", g.flow_steps);
    } else {
      fail(ErrorKind::kConfig, "unknown region kind '" + kind + "'");
    }
  }
  if (j.contains("control")) {
    const std::string kind = text_or(j.at("control"), "kind", "explicit");
    if (kind == "explicit") {
      c.control = HeatControl::kExplicit;
    } else if (kind == "synthesized") {
      c.control = HeatControl::kSynthesized;
    } else if (kind == "zero") {
      c.control = HeatControl::kZero;
    } else {
      fail(ErrorKind::kConfig, "unknown control kind '" + kind + "'");
    }
  }
  if (j.contains("history")) {
    const Json& h = j.at("history");
    const std::string kind = text_or(h, "kind", "sine");
    require(kind == "sine", ErrorKind::kConfig, "history kind must be 'sine'");
    const double amp = number_or(h, "amplitude", 1.0);
    const double mode = number_or(h, "mode", 1.0);
    c.profile = [amp, mode](double x) { return amp * std::sin(mode * x); };
  }
  if (j.contains("synthesis")) c.synthesis = synthesis_config_from_json(j.at("synthesis"));
  c.validate();
  return c;
}

WeightSpec weight_spec_from_json(const Json& j) {
  WeightSpec w;
  w.delta = number_or(j, "delta", w.delta);
  w.lambda = number_or(j, "lambda", w.lambda);
  w.s = number_or(j, "s", w.s);
  w.T = number_or(j, "T", w.T);
  w.h = number_or(j, "h", w.h);
  w.sweep_width = number_or(j, "sweep_width", w.sweep_width);
  if (j.contains("psi_constant")) {
    const double c = number(j, "psi_constant");
    w.psi = [c](double, double) { return c; };
  }
  w.validate();
  return w;
}

SpaceTimeField read_field_csv(const std::string& path, double h) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kConfig, "cannot open " + path);
  std::string line;
  std::getline(in, line);  // header
  std::map<double, std::map<double, double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    double t = 0.0, x = 0.0, v = 0.0;
    char c1 = 0, c2 = 0;
    if (!(ss >> t >> c1 >> x >> c2 >> v) || c1 != ',' || c2 != ',') {
      fail(ErrorKind::kConfig, path + ": malformed row '" + line + "'");
    }
    rows[t][x] = v;
  }
  require(!rows.empty(), ErrorKind::kConfig, path + ": no data rows");
  const auto nx = static_cast<int>(rows.begin()->second.size());
  std::vector<Vec> past, present;
  std::vector<double> times;
  for (const auto& [t, row] : rows) {
    require(static_cast<int>(row.size()) == nx, ErrorKind::kConfig,
            path + ": every time must carry the same x nodes");
    Vec r(nx);
    int j = 0;
    for (const auto& [x, v] : row) r(j++) = v;
    if (t < -1e-12) {
      past.push_back(r);
    } else {
      present.push_back(r);
      times.push_back(t);
    }
  }
  require(present.size() >= 3, ErrorKind::kConfig,
          path + ": need at least three time nodes at t >= 0");
  SpaceTimeField f;
  f.T = times.back() - times.front();
  f.values.resize(static_cast<Eigen::Index>(present.size()), nx);
  for (std::size_t k = 0; k < present.size(); ++k) {
    f.values.row(static_cast<Eigen::Index>(k)) = present[k].transpose();
  }
  const double dt = f.dt();
  const int D = static_cast<int>(std::lround(h / dt));
  if (!past.empty()) {
    // Keep the D most recent rows before t = 0, i.e. t = -D dt .. -dt.
    require(static_cast<int>(past.size()) >= D, ErrorKind::kConfig,
            path + ": history shorter than h");
    f.history.resize(D, nx);
    const std::size_t first = past.size() - static_cast<std::size_t>(D);
    for (int k = 0; k < D; ++k) {
      f.history.row(k) = past[first + static_cast<std::size_t>(k)].transpose();
    }
  }
  return f;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace dmc::io
