#pragma once

// File formats: versioned CSV tables, fit.json, and static SVG plots.
//
// Every CSV starts with a schema line "# pdreg:<table>:v<N>" followed by a
// mandatory header row. Readers reject other tables or versions.

#include "pdreg/covpipe.hpp"
#include "pdreg/dataset.hpp"
#include "pdreg/errors.hpp"
#include "pdreg/estimators.hpp"
#include "pdreg/idea.hpp"
#include "pdreg/modelselect.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace pdreg::io {

class io_error : public config_error
{
public:
  using config_error::config_error;
};

inline constexpr int schema_version = 1;

inline std::string format_double(double x)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, std::string_view what)
{
  std::string_view t = text;
  while (!t.empty() && (t.front() == ' ' || t.front() == '\t'))
    t.remove_prefix(1);
  while (!t.empty() && (t.back() == ' ' || t.back() == '\t' || t.back() == '\r'))
    t.remove_suffix(1);
  if (!t.empty() && t.front() == '+')
    t.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(value))
    throw io_error(std::string(what) + ": cannot parse '" + std::string(text) + "' as a finite number");
  return value;
}

inline std::vector<std::string> split_csv_line(std::string_view line)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    std::string cell(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' '))
      cell.pop_back();
    while (!cell.empty() && cell.front() == ' ')
      cell.erase(cell.begin());
    out.push_back(std::move(cell));
    if (comma == std::string_view::npos)
      break;
    start = comma + 1;
  }
  return out;
}

/// A parsed CSV table: schema name, header, numeric rows, and any extra
/// "# key=value" metadata lines that precede the header.
struct Table
{
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, std::string>> meta;

  std::optional<std::size_t> column(std::string_view col) const
  {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == col)
        return i;
    return std::nullopt;
  }
  std::size_t require_column(std::string_view col, std::string_view source) const
  {
    const auto c = column(col);
    if (!c)
      throw io_error(std::string(source) + ": missing column '" + std::string(col) + "'");
    return *c;
  }
  std::optional<std::string> meta_value(std::string_view key) const
  {
    for (const auto& [k, v] : meta)
      if (k == key)
        return v;
    return std::nullopt;
  }
};

inline Table parse_table(std::istream& in, std::string_view expected, std::string_view source)
{
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) { return io_error(std::string(source) + ":" + std::to_string(lineno) + ": " + msg); };

  Table t;
  if (!std::getline(in, line))
    throw io_error(std::string(source) + ": empty file, expected schema line '# pdreg:" + std::string(expected) + ":v1'");
  ++lineno;
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
  const std::string prefix = "# pdreg:";
  if (line.rfind(prefix, 0) != 0)
    throw fail("field 'schema': missing '# pdreg:<table>:v<N>' line");
  const std::string spec = line.substr(prefix.size());
  const auto colon = spec.rfind(':');
  if (colon == std::string::npos || colon + 1 >= spec.size() || spec[colon + 1] != 'v')
    throw fail("field 'schema': malformed schema '" + spec + "'");
  t.name = spec.substr(0, colon);
  if (t.name != expected)
    throw fail("field 'schema': expected table '" + std::string(expected) + "', found '" + t.name + "'");
  const std::string version = spec.substr(colon + 2);
  if (version != std::to_string(schema_version))
    throw fail("field 'schema': unsupported version 'v" + version + "'");

  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    if (line[0] == '#') {
      if (have_header)
        continue;
      const auto body = std::string_view(line).substr(1);
      const auto eq = body.find('=');
      if (eq != std::string_view::npos) {
        auto key = std::string(body.substr(0, eq));
        key.erase(0, key.find_first_not_of(' '));
        t.meta.emplace_back(key, std::string(body.substr(eq + 1)));
      }
      continue;
    }
    auto cells = split_csv_line(line);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size())
      throw fail("expected " + std::to_string(t.header.size()) + " fields, found " + std::to_string(cells.size()));
    std::vector<double> row(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      try {
        row[i] = parse_double(cells[i], "field '" + t.header[i] + "'");
      } catch (const io_error& e) {
        throw fail(e.what());
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (!have_header)
    throw io_error(std::string(source) + ": missing header row");
  return t;
}

inline Table read_table(const std::string& path, std::string_view expected)
{
  std::ifstream in(path);
  if (!in)
    throw io_error(path + ": cannot open for reading");
  return parse_table(in, expected, path);
}

inline void write_table(std::ostream& out, std::string_view name, const std::vector<std::string>& header,
                        const std::vector<std::vector<double>>& rows,
                        const std::vector<std::pair<std::string, std::string>>& meta = {})
{
  out << "# pdreg:" << name << ":v" << schema_version << "\n";
  for (const auto& [k, v] : meta)
    out << "# " << k << "=" << v << "\n";
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_double(row[i]);
    out << "\n";
  }
}

inline std::ofstream open_out(const std::string& path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw io_error(path + ": cannot open for writing");
  return out;
}

inline void write_file(const std::string& path, const std::string& content)
{
  auto out = open_out(path);
  out << content;
  if (!out)
    throw io_error(path + ": write failed");
}

// Regression data: r,y (radial) or x1,...,xd,y.

inline void write_regression(std::ostream& out, const RegressionDataset& data)
{
  std::vector<std::string> header;
  if (data.dim == 1)
    header.push_back("r");
  else
    for (std::size_t c = 0; c < data.dim; ++c)
      header.push_back("x" + std::to_string(c + 1));
  header.push_back("y");
  if (data.weighted())
    header.push_back("w");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.input(i);
    std::vector<double> row(x.begin(), x.end());
    row.push_back(data.y[i]);
    if (data.weighted())
      row.push_back(data.weights[i]);
    rows.push_back(std::move(row));
  }
  write_table(out, "regression", header, rows);
}

inline RegressionDataset regression_from_table(const Table& t, std::string_view source)
{
  const std::size_t ycol = t.require_column("y", source);
  std::vector<std::size_t> xcols;
  if (const auto r = t.column("r")) {
    xcols.push_back(*r);
  } else {
    for (std::size_t c = 1;; ++c) {
      const auto col = t.column("x" + std::to_string(c));
      if (!col)
        break;
      xcols.push_back(*col);
    }
  }
  if (xcols.empty())
    throw io_error(std::string(source) + ": missing column 'r' (or 'x1', 'x2', ...)");
  const auto wcol = t.column("w");
  if (const auto r = t.column("r")) {
    for (std::size_t i = 0; i < t.rows.size(); ++i)
      if (t.rows[i][*r] < 0.0)
        throw io_error(std::string(source) + ": row " + std::to_string(i + 1) + ": field 'r': distances must be >= 0");
  }
  RegressionDataset data;
  data.dim = xcols.size();
  for (const auto& row : t.rows) {
    for (std::size_t c : xcols)
      data.x.push_back(row[c]);
    data.y.push_back(row[ycol]);
    if (wcol)
      data.weights.push_back(row[*wcol]);
  }
  try {
    data.validate();
  } catch (const std::exception& e) {
    throw io_error(std::string(source) + ": " + e.what());
  }
  return data;
}

inline RegressionDataset read_regression(const std::string& path)
{
  return regression_from_table(read_table(path, "regression"), path);
}

// Spatial field: x1,...,xd,z.

inline void write_field(std::ostream& out, const SpatialField& field)
{
  std::vector<std::string> header;
  for (std::size_t c = 0; c < field.dim; ++c)
    header.push_back("x" + std::to_string(c + 1));
  header.push_back("z");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const auto s = field.location(i);
    std::vector<double> row(s.begin(), s.end());
    row.push_back(field.values[i]);
    rows.push_back(std::move(row));
  }
  write_table(out, "field", header, rows);
}

inline SpatialField field_from_table(const Table& t, std::string_view source)
{
  const std::size_t zcol = t.require_column("z", source);
  std::vector<std::size_t> xcols;
  for (std::size_t c = 1;; ++c) {
    const auto col = t.column("x" + std::to_string(c));
    if (!col)
      break;
    xcols.push_back(*col);
  }
  if (xcols.empty())
    throw io_error(std::string(source) + ": missing column 'x1'");
  SpatialField field;
  field.dim = xcols.size();
  for (const auto& row : t.rows) {
    for (std::size_t c : xcols)
      field.locations.push_back(row[c]);
    field.values.push_back(row[zcol]);
  }
  try {
    field.validate();
  } catch (const std::exception& e) {
    throw io_error(std::string(source) + ": " + e.what());
  }
  return field;
}

inline SpatialField read_field(const std::string& path)
{
  return field_from_table(read_table(path, "field"), path);
}

// Covariance point set: r,c,count with the sample variance as metadata.

inline void write_points(std::ostream& out, const CovPointSet& pts)
{
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < pts.size(); ++i)
    rows.push_back({pts.distances[i], pts.estimates[i], pts.counts[i]});
  write_table(out, "points", {"r", "c", "count"}, rows, {{"diagonal_variance", format_double(pts.diagonal_variance)}});
}

inline CovPointSet points_from_table(const Table& t, std::string_view source)
{
  const std::size_t rcol = t.require_column("r", source);
  const std::size_t ccol = t.require_column("c", source);
  const auto ncol = t.column("count");
  const auto dv = t.meta_value("diagonal_variance");
  if (!dv)
    throw io_error(std::string(source) + ": missing metadata 'diagonal_variance'");
  CovPointSet pts;
  pts.diagonal_variance = parse_double(*dv, std::string(source) + ": field 'diagonal_variance'");
  for (const auto& row : t.rows) {
    pts.distances.push_back(row[rcol]);
    pts.estimates.push_back(row[ccol]);
    pts.counts.push_back(ncol ? row[*ncol] : 1.0);
  }
  try {
    pts.validate();
  } catch (const std::exception& e) {
    throw io_error(std::string(source) + ": " + e.what());
  }
  return pts;
}

inline CovPointSet read_points(const std::string& path)
{
  return points_from_table(read_table(path, "points"), path);
}

// Curve: r,[truth,]fit.

struct Curve
{
  std::vector<double> r;
  std::vector<double> fit;
  std::vector<double> truth;  ///< empty when no truth was supplied
};

inline void write_curve(std::ostream& out, const Curve& curve)
{
  const bool has_truth = !curve.truth.empty();
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < curve.r.size(); ++i) {
    if (has_truth)
      rows.push_back({curve.r[i], curve.truth[i], curve.fit[i]});
    else
      rows.push_back({curve.r[i], curve.fit[i]});
  }
  write_table(out, "curve", has_truth ? std::vector<std::string>{"r", "truth", "fit"} : std::vector<std::string>{"r", "fit"},
              rows);
}

inline Curve curve_from_table(const Table& t, std::string_view source)
{
  const std::size_t rcol = t.require_column("r", source);
  const std::size_t fcol = t.require_column("fit", source);
  const auto tcol = t.column("truth");
  Curve c;
  for (const auto& row : t.rows) {
    c.r.push_back(row[rcol]);
    c.fit.push_back(row[fcol]);
    if (tcol)
      c.truth.push_back(row[*tcol]);
  }
  return c;
}

inline Curve read_curve(const std::string& path)
{
  return curve_from_table(read_table(path, "curve"), path);
}

// IDEA trace.

inline void write_trace(std::ostream& out, const IdeaTrace& trace)
{
  std::vector<std::vector<double>> rows;
  for (const auto& r : trace.records)
    rows.push_back({static_cast<double>(r.iter), r.obj_min, r.obj_selected_max, r.obj_mean, r.obj_max, r.d_kl});
  write_table(out, "trace", {"iter", "obj_min", "obj_selected_max", "obj_mean", "obj_max", "d_kl"}, rows,
              {{"converged", trace.converged ? "true" : "false"}});
}

inline IdeaTrace trace_from_table(const Table& t, std::string_view source)
{
  const char* cols[] = {"iter", "obj_min", "obj_selected_max", "obj_mean", "obj_max", "d_kl"};
  std::size_t idx[6];
  for (int i = 0; i < 6; ++i)
    idx[i] = t.require_column(cols[i], source);
  IdeaTrace trace;
  for (const auto& row : t.rows) {
    IdeaTraceRecord r;
    r.iter = static_cast<std::size_t>(row[idx[0]]);
    r.obj_min = row[idx[1]];
    r.obj_selected_max = row[idx[2]];
    r.obj_mean = row[idx[3]];
    r.obj_max = row[idx[4]];
    r.d_kl = row[idx[5]];
    trace.records.push_back(r);
  }
  trace.converged = t.meta_value("converged") == std::optional<std::string>("true");
  return trace;
}

inline IdeaTrace read_trace(const std::string& path)
{
  return trace_from_table(read_table(path, "trace"), path);
}

inline void write_cv(std::ostream& out, const CvResult& cv)
{
  std::vector<std::vector<double>> rows;
  for (const auto& c : cv.table)
    rows.push_back({c.h, static_cast<double>(c.m), c.mean_mse});
  write_table(out, "cv", {"h", "m", "mean_mse"}, rows,
              {{"chosen_h", format_double(cv.chosen_h)}, {"chosen_m", std::to_string(cv.chosen_m)}});
}

// fit.json

using json = nlohmann::json;

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(std::string_view s)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t x)
{
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << x;
  return os.str();
}

inline json idea_config_json(const IdeaConfig& c)
{
  return json{{"m", c.m},
              {"h", c.h},
              {"l", c.population_size()},
              {"tau", c.tau},
              {"kl_threshold", c.kl_threshold},
              {"kl_patience", c.kl_patience},
              {"max_iters", c.max_iters},
              {"seed", c.seed}};
}

struct FitRecord
{
  FittedEstimator fit;
  std::optional<IdeaTrace> trace;
  json config = json::object();  ///< what produced the fit; hashed into config_hash
};

inline json fit_to_json(const FitRecord& rec)
{
  const auto& f = rec.fit;
  json j;
  j["schema"] = "pdreg-fit/v" + std::to_string(schema_version);
  j["kind"] = std::string(to_string(f.spec.kind));
  j["kernel"] = std::string(to_string(f.spec.kernel.family));
  j["h"] = f.spec.kernel.h;
  j["dim"] = f.spec.dim;
  j["bandwidth_diag"] = f.spec.bandwidth_diag;
  j["pseudo_dim"] = f.pseudo.dim;
  j["pseudo"] = f.pseudo.values;
  j["sigma2"] = f.sigma2;
  if (rec.trace) {
    const auto& t = *rec.trace;
    j["trace"] = {{"iterations", t.iterations()},
                  {"converged", t.converged},
                  {"final_objective", t.records.empty() ? 0.0 : t.final_objective()},
                  {"final_d_kl", t.records.empty() ? 0.0 : t.records.back().d_kl}};
  }
  j["config"] = rec.config;
  j["config_hash"] = hex64(fnv1a(rec.config.dump()));
  return j;
}

inline FitRecord fit_from_json(const json& j, std::string_view source = "fit.json")
{
  auto field = [&](const char* key) -> const json& {
    if (!j.contains(key))
      throw io_error(std::string(source) + ": missing field '" + key + "'");
    return j.at(key);
  };
  FitRecord rec;
  try {
    const std::string schema = field("schema").get<std::string>();
    if (schema != "pdreg-fit/v" + std::to_string(schema_version))
      throw io_error(std::string(source) + ": field 'schema': unsupported '" + schema + "'");
    auto& f = rec.fit;
    f.spec.kind = parse_estimator_kind(field("kind").get<std::string>());
    f.spec.kernel.family = parse_kernel_family(field("kernel").get<std::string>());
    f.spec.kernel.h = field("h").get<double>();
    f.spec.dim = field("dim").get<std::size_t>();
    f.spec.bandwidth_diag = j.value("bandwidth_diag", std::vector<double>{});
    f.pseudo.dim = j.value("pseudo_dim", std::size_t{1});
    f.pseudo.values = field("pseudo").get<std::vector<double>>();
    f.sigma2 = field("sigma2").get<double>();
    rec.config = j.value("config", json::object());
    f.validate();
  } catch (const io_error&) {
    throw;
  } catch (const std::exception& e) {
    throw io_error(std::string(source) + ": " + e.what());
  }
  return rec;
}

inline void write_fit(const std::string& path, const FitRecord& rec)
{
  write_file(path, fit_to_json(rec).dump(2) + "\n");
}

inline FitRecord read_fit(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw io_error(path + ": cannot open for reading");
  json j;
  try {
    j = json::parse(in);
  } catch (const std::exception& e) {
    throw io_error(path + ": invalid JSON: " + e.what());
  }
  return fit_from_json(j, path);
}

// SVG

namespace svg {

struct Series
{
  std::vector<double> x;
  std::vector<double> y;
  std::string label;
  std::string color = "black";
  std::string dash;          ///< stroke-dasharray, empty for solid
  bool points = false;       ///< scatter instead of polyline
};

struct Frame
{
  double left = 0, top = 0, width = 0, height = 0;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * width; }
  double py(double y) const { return top + height - (y - y0) / (y1 - y0) * height; }
};

inline std::string num(double x)
{
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << x;
  return os.str();
}

inline std::string tick_label(double x)
{
  std::ostringstream os;
  os << std::setprecision(3) << x;
  return os.str();
}

inline std::string escape(std::string_view s)
{
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    default: out += c;
    }
  }
  return out;
}

inline std::vector<double> nice_ticks(double lo, double hi, int target = 6)
{
  const double span = hi - lo;
  if (!(span > 0.0))
    return {lo};
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double f : {1.0, 2.0, 5.0, 10.0}) {
    step = f * mag;
    if (raw <= step)
      break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step)
    ticks.push_back(std::fabs(t) < 1e-12 * span ? 0.0 : t);
  return ticks;
}

/// One panel with axes, ticks, the given series and a legend.
inline void panel(std::ostringstream& os, Frame f, const std::vector<Series>& series, const std::string& xlabel,
                  const std::string& ylabel)
{
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
        continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!std::isfinite(xmin)) {
    xmin = 0;
    xmax = 1;
    ymin = 0;
    ymax = 1;
  }
  if (xmax == xmin)
    xmax = xmin + 1;
  if (ymax == ymin) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double pad = 0.05 * (ymax - ymin);
  f.x0 = xmin;
  f.x1 = xmax;
  f.y0 = ymin - pad;
  f.y1 = ymax + pad;

  os << "<rect x=\"" << num(f.left) << "\" y=\"" << num(f.top) << "\" width=\"" << num(f.width) << "\" height=\""
     << num(f.height) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : nice_ticks(f.x0, f.x1)) {
    os << "<line x1=\"" << num(f.px(t)) << "\" y1=\"" << num(f.top + f.height) << "\" x2=\"" << num(f.px(t))
       << "\" y2=\"" << num(f.top + f.height + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(f.px(t)) << "\" y=\"" << num(f.top + f.height + 18)
       << "\" font-size=\"11\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  }
  for (double t : nice_ticks(f.y0, f.y1)) {
    os << "<line x1=\"" << num(f.left - 5) << "\" y1=\"" << num(f.py(t)) << "\" x2=\"" << num(f.left) << "\" y2=\""
       << num(f.py(t)) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(f.left - 8) << "\" y=\"" << num(f.py(t) + 4)
       << "\" font-size=\"11\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
  }
  os << "<text x=\"" << num(f.left + f.width / 2) << "\" y=\"" << num(f.top + f.height + 36)
     << "\" font-size=\"12\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n";
  os << "<text x=\"" << num(f.left - 48) << "\" y=\"" << num(f.top + f.height / 2) << "\" font-size=\"12\" "
     << "text-anchor=\"middle\" transform=\"rotate(-90 " << num(f.left - 48) << " " << num(f.top + f.height / 2)
     << ")\">" << escape(ylabel) << "</text>\n";

  for (const auto& s : series) {
    if (s.points) {
      os << "<g fill=\"" << s.color << "\">\n";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
          os << "<circle cx=\"" << num(f.px(s.x[i])) << "\" cy=\"" << num(f.py(s.y[i])) << "\" r=\"1.8\"/>\n";
      os << "</g>\n";
      continue;
    }
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
    if (!s.dash.empty())
      os << " stroke-dasharray=\"" << s.dash << "\"";
    os << " points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
        os << num(f.px(s.x[i])) << "," << num(f.py(s.y[i])) << " ";
    os << "\"/>\n";
  }

  double ly = f.top + 14;
  for (const auto& s : series) {
    const double lx = f.left + f.width - 140;
    if (s.points)
      os << "<circle cx=\"" << num(lx + 12) << "\" cy=\"" << num(ly - 4) << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
    else
      os << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(lx + 24) << "\" y2=\""
         << num(ly - 4) << "\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
         << (s.dash.empty() ? "" : " stroke-dasharray=\"" + s.dash + "\"") << "/>\n";
    os << "<text x=\"" << num(lx + 30) << "\" y=\"" << num(ly) << "\" font-size=\"11\">" << escape(s.label)
       << "</text>\n";
    ly += 16;
  }
}

inline std::string document(double width, double height, const std::string& body)
{
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
     << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << body << "</svg>\n";
  return os.str();
}

} // namespace svg

/// Observations as gray points, truth solid, fit dashed.
inline std::string plot_curve_svg(const Curve& curve, const RegressionDataset* points = nullptr)
{
  std::vector<svg::Series> series;
  if (points != nullptr) {
    svg::Series obs{{}, {}, "observations", "#999999", "", true};
    for (std::size_t i = 0; i < points->size(); ++i) {
      obs.x.push_back(points->radius(i));
      obs.y.push_back(points->y[i]);
    }
    series.push_back(std::move(obs));
  }
  if (!curve.truth.empty())
    series.push_back({curve.r, curve.truth, "truth", "black", "", false});
  series.push_back({curve.r, curve.fit, "estimate", "#d62728", "8,4", false});
  std::ostringstream os;
  svg::panel(os, {70, 20, 560, 340}, series, "r", "value");
  return svg::document(660, 420, os.str());
}

/// Objective series (min, largest selected, mean, max) and the KL series
/// side by side.
inline std::string plot_trace_svg(const IdeaTrace& trace)
{
  std::vector<double> it, mn, sel, mean, mx, kl;
  for (const auto& r : trace.records) {
    it.push_back(static_cast<double>(r.iter));
    mn.push_back(r.obj_min);
    sel.push_back(r.obj_selected_max);
    mean.push_back(r.obj_mean);
    mx.push_back(r.obj_max);
    kl.push_back(r.d_kl);
  }
  std::ostringstream os;
  svg::panel(os, {70, 20, 400, 320},
             {{it, mn, "minimum", "#d62728", "8,3,2,3", false},
              {it, sel, "largest selected", "black", "", false},
              {it, mean, "mean", "#1f77b4", "6,4", false},
              {it, mx, "maximum", "#2ca02c", "2,3", false}},
             "iteration", "objective");
  svg::panel(os, {560, 20, 400, 320}, {{it, kl, "KL divergence", "black", "", false}}, "iteration", "KL");
  return svg::document(1000, 400, os.str());
}

} // namespace pdreg::io
