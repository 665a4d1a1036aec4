#ifndef SPCUBE_IO_HPP
#define SPCUBE_IO_HPP

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "spcube/simulate.hpp"

namespace spcube::io {

// Shortest round-trip decimal form ("%.17g"), used by every CSV writer so
// reruns are byte-identical.
std::string format_double(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/* Binary matrix container: 8 magic bytes "SPCMATRX", then little-endian
 * uint64 rows and cols, then rows*cols little-endian float64 values in
 * row-major order.
 */
void write_matrix_bin(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_bin(const std::string& path);

// Headerless numeric CSV, one matrix row per line.
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::string& path);

/* Dataset CSV with header
 *   x_coord,y_coord,x1..xp,z,omega,split
 * where split is "train" or "test".
 */
void write_dataset_csv(const std::string& path, const SpatialDataset& ds);
SpatialDataset read_dataset_csv(const std::string& path);

/* Generic tabular loader for externally supplied data: needs columns
 * x_coord, y_coord, at least one covariate column, and a response column
 * named z (omega and split are optional).  Rows with non-finite values are
 * rejected with their line number.  When the file carries no split column,
 * rows are partitioned by a seeded uniform permutation at train_fraction.
 */
SpatialDataset load_tabular_dataset(const std::string& path,
                                    double train_fraction, std::uint64_t seed,
                                    bool log_transform = false);

/* Minimal INI-style config reader: [section] headers (dots allowed for
 * nesting), key = value lines, # or ; comments.  Keys are exposed flat as
 * "section.key".
 */
class Ini {
 public:
  static Ini parse(const std::string& text);
  static Ini load(const std::string& path);

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;  // throws if absent
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key,
                                  std::vector<double> fallback) const;
  std::vector<std::string> get_strings(const std::string& key,
                                       std::vector<std::string> fallback) const;

  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace spcube::io

#endif  // SPCUBE_IO_HPP
