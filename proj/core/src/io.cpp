#include "spcube/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "spcube/rng.hpp"

namespace spcube::io {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'C', 'M', 'A', 'T', 'R', 'X'};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(where + ": cannot parse number '" + s + "'");
  }
}

void require_finite(double v, const std::string& where) {
  if (!std::isfinite(v))
    throw std::runtime_error(where + ": non-finite value");
}

// Little-endian raw write; this codebase only targets little-endian hosts,
// checked once at runtime.
void check_little_endian() {
  const std::uint16_t probe = 1;
  if (*reinterpret_cast<const std::uint8_t*>(&probe) != 1)
    throw std::runtime_error("matrix container requires a little-endian host");
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_matrix_bin(const std::string& path, const Eigen::MatrixXd& m) {
  check_little_endian();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t rows = static_cast<std::uint64_t>(m.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(m.cols());
  out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Eigen::MatrixXd read_matrix_bin(const std::string& path) {
  check_little_endian();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error(path + ": not a matrix container (bad magic)");
  std::uint64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  if (!in) throw std::runtime_error(path + ": truncated header");
  if (rows > (1ULL << 32) || cols > (1ULL << 32))
    throw std::runtime_error(path + ": implausible dimensions");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(cols));
  for (std::uint64_t i = 0; i < rows; ++i)
    for (std::uint64_t j = 0; j < cols; ++j) {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof(v));
      if (!in) throw std::runtime_error(path + ": truncated payload");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  return m;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  std::ostringstream out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  write_text_file(path, out.str());
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields)
      row.push_back(parse_double(f, path + ":" + std::to_string(lineno)));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Eigen::MatrixXd(0, 0);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.front().size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

void write_dataset_csv(const std::string& path, const SpatialDataset& ds) {
  const int n = ds.n();
  const int p = ds.p();
  std::vector<char> is_train(n, 0);
  for (int i : ds.train_idx) is_train[i] = 1;

  std::ostringstream out;
  out << "x_coord,y_coord";
  for (int j = 1; j <= p; ++j) out << ",x" << j;
  out << ",z,omega,split\n";
  for (int i = 0; i < n; ++i) {
    out << format_double(ds.locations(i, 0)) << ','
        << format_double(ds.locations(i, 1));
    for (int j = 0; j < p; ++j) out << ',' << format_double(ds.X(i, j));
    out << ',' << format_double(ds.z(i)) << ',' << format_double(ds.omega(i))
        << ',' << (is_train[i] ? "train" : "test") << '\n';
  }
  write_text_file(path, out.str());
}

namespace {

SpatialDataset dataset_from_rows(const std::vector<std::string>& header,
                                 const std::vector<std::vector<std::string>>& rows,
                                 const std::string& path) {
  auto col_of = [&](const std::string& name) -> int {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1
                              : static_cast<int>(it - header.begin());
  };
  const int cx = col_of("x_coord"), cy = col_of("y_coord"), cz = col_of("z");
  if (cx < 0 || cy < 0 || cz < 0)
    throw std::runtime_error(path + ": header must include x_coord, y_coord, z");
  const int comega = col_of("omega");
  const int csplit = col_of("split");

  std::vector<int> covariate_cols;
  for (int j = 1;; ++j) {
    const int c = col_of("x" + std::to_string(j));
    if (c < 0) break;
    covariate_cols.push_back(c);
  }

  const int n = static_cast<int>(rows.size());
  const int p = static_cast<int>(covariate_cols.size());
  if (n == 0) throw std::runtime_error(path + ": no data rows");

  SpatialDataset ds;
  ds.locations.resize(n, 2);
  ds.X.resize(n, p);
  ds.z.resize(n);
  ds.omega = Eigen::VectorXd::Zero(n);

  for (int i = 0; i < n; ++i) {
    const auto& r = rows[i];
    const std::string where = path + ": data row " + std::to_string(i + 1);
    if (static_cast<int>(r.size()) != static_cast<int>(header.size()))
      throw std::runtime_error(where + ": wrong field count");
    ds.locations(i, 0) = parse_double(r[cx], where);
    ds.locations(i, 1) = parse_double(r[cy], where);
    for (int j = 0; j < p; ++j)
      ds.X(i, j) = parse_double(r[covariate_cols[j]], where);
    ds.z(i) = parse_double(r[cz], where);
    if (comega >= 0) ds.omega(i) = parse_double(r[comega], where);
    require_finite(ds.locations(i, 0), where);
    require_finite(ds.locations(i, 1), where);
    for (int j = 0; j < p; ++j) require_finite(ds.X(i, j), where);
    require_finite(ds.z(i), where);
    require_finite(ds.omega(i), where);

    if (csplit >= 0) {
      if (r[csplit] == "train")
        ds.train_idx.push_back(i);
      else if (r[csplit] == "test")
        ds.test_idx.push_back(i);
      else
        throw std::runtime_error(where + ": split must be train or test");
    }
  }
  return ds;
}

}  // namespace

SpatialDataset read_dataset_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty file");
  const auto header = split_csv_line(line);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  SpatialDataset ds = dataset_from_rows(header, rows, path);
  if (ds.train_idx.empty() && ds.test_idx.empty())
    throw std::runtime_error(path + ": missing split column");
  return ds;
}

SpatialDataset load_tabular_dataset(const std::string& path,
                                    double train_fraction, std::uint64_t seed,
                                    bool log_transform) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument(
        "load_tabular_dataset: train_fraction must lie in (0,1)");
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty file");
  const auto header = split_csv_line(line);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  SpatialDataset ds = dataset_from_rows(header, rows, path);

  if (log_transform) {
    for (Eigen::Index i = 0; i < ds.z.size(); ++i) {
      if (!(ds.z(i) > 0.0))
        throw std::runtime_error(path + ": data row " + std::to_string(i + 1) +
                                 ": log transform needs positive responses");
      ds.z(i) = std::log(ds.z(i));
    }
  }

  if (ds.train_idx.empty() && ds.test_idx.empty()) {
    const int n = ds.n();
    const int n_train =
        std::clamp(static_cast<int>(std::lround(train_fraction * n)), 1, n - 1);
    auto eng = rng::make_engine(rng::derive_seed(seed, rng::Stream::split));
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), eng);
    ds.train_idx.assign(perm.begin(), perm.begin() + n_train);
    ds.test_idx.assign(perm.begin() + n_train, perm.end());
    std::sort(ds.train_idx.begin(), ds.train_idx.end());
    std::sort(ds.test_idx.begin(), ds.test_idx.end());
  }
  return ds;
}

Ini Ini::parse(const std::string& text) {
  Ini ini;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // strip comments outside of values; '#' and ';' both start one
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config line " + std::to_string(lineno) +
                                 ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw std::runtime_error("config line " + std::to_string(lineno) +
                                 ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": empty key");
    ini.kv_[section.empty() ? key : section + "." + key] = value;
  }
  return ini;
}

Ini Ini::load(const std::string& path) { return parse(read_text_file(path)); }

bool Ini::has(const std::string& key) const { return kv_.count(key) > 0; }

const std::string& Ini::get(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end())
    throw std::runtime_error("config: missing key '" + key + "'");
  return it->second;
}

std::string Ini::get_or(const std::string& key,
                        const std::string& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double Ini::get_double(const std::string& key, double fallback) const {
  return has(key) ? parse_double(get(key), "config key " + key) : fallback;
}

int Ini::get_int(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const double v = parse_double(get(key), "config key " + key);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw std::runtime_error("config key " + key + ": expected integer");
  return i;
}

std::uint64_t Ini::get_u64(const std::string& key,
                           std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  try {
    return std::stoull(get(key));
  } catch (const std::exception&) {
    throw std::runtime_error("config key " + key + ": expected unsigned integer");
  }
}

bool Ini::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::runtime_error("config key " + key + ": expected boolean");
}

std::vector<double> Ini::get_doubles(const std::string& key,
                                     std::vector<double> fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  for (const auto& f : split_csv_line(get(key)))
    if (!f.empty()) out.push_back(parse_double(f, "config key " + key));
  return out;
}

std::vector<std::string> Ini::get_strings(
    const std::string& key, std::vector<std::string> fallback) const {
  if (!has(key)) return fallback;
  std::vector<std::string> out;
  for (const auto& f : split_csv_line(get(key)))
    if (!f.empty()) out.push_back(f);
  return out;
}

void Ini::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

}  // namespace spcube::io
