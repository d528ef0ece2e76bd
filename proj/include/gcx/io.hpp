#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gcx/data.hpp"
#include "gcx/rng.hpp"

namespace gcx {

/// Flat key = value configuration document ('#' starts a comment). Keys are
/// declared up front by the consumer; any undeclared key in the file is an
/// error, and every resolved value can be written back out verbatim.
class RunConfig {
 public:
  static RunConfig parse_file(const std::filesystem::path& path);
  static RunConfig parse_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key) const;
  long get_int(const std::string& key, long fallback) const;
  std::vector<double> get_vector(const std::string& key) const;  // comma-split
  std::vector<int> get_int_vector(const std::string& key,
                                  const std::vector<int>& fallback) const;

  void set(const std::string& key, const std::string& value);
  /// Throws if any parsed key was never declared via get_*/set/allow.
  void reject_unknown_keys() const;
  void allow(const std::string& key);

  /// key = value lines in first-use order, suitable for the resolved-config
  /// file written beside a run's outputs.
  std::string to_string() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  mutable std::vector<std::string> touched_;
  const std::string* find(const std::string& key) const;
};

/// Self-describing model container: a text header carrying the format
/// version, model kind, named tensor shapes and training metadata, followed
/// by the flat parameter payload as little-endian 64-bit floats. Loading a
/// saved checkpoint reproduces every parameter bit-exactly.
struct Checkpoint {
  int version = 1;
  std::string kind;
  std::map<std::string, std::string> metadata;
  std::vector<std::pair<std::string, Eigen::MatrixXd>> tensors;

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

  const Eigen::MatrixXd& tensor(const std::string& name) const;
  bool has_tensor(const std::string& name) const;
  std::string meta(const std::string& key, const std::string& fallback = "") const;
};

/// Images plus labels in the classic big-endian IDX layout, scaled to [0,1].
struct IdxDataset {
  int rows = 0;
  int cols = 0;
  Eigen::MatrixXd images;  // n x (rows*cols)
  Eigen::VectorXi labels;  // raw label bytes
};

/// Parses an image/label IDX pair, keeping only samples whose label is in
/// `class_filter` (empty keeps everything). Bad magic numbers, truncated
/// payloads and count mismatches are reported as distinct errors.
IdxDataset load_idx(const std::filesystem::path& image_path,
                    const std::filesystem::path& label_path,
                    const std::vector<int>& class_filter = {});

void save_idx(const IdxDataset& data, const std::filesystem::path& image_path,
              const std::filesystem::path& label_path);

/// Remaps raw labels to contiguous class ids (sorted by raw value) and
/// splits 5/6 train, 1/6 validation in file order.
SplitDataset split_idx(const IdxDataset& data);

enum class SynthKind { kIsotropicGaussian, kTwoGaussianLabeled, kLowRankGaussian };
SynthKind synth_kind_from_string(const std::string& s);

struct SynthParams {
  int dim = 2;
  int count = 1000;
  double separation = 6.0;  // two-gaussian: distance between the class means
  int rank = 1;             // low-rank kind
};

Dataset synth_dataset(SynthKind kind, const SynthParams& params, SeededRng& rng);

// -- simple exports ------------------------------------------------------------

/// Comma-separated values with a header row and '.' decimal separator.
void write_csv(const std::filesystem::path& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// 8-bit binary PGM (P5). `image` entries are clamped to [0, 1].
void write_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& image);

/// Tiles row-vector images (one per grid cell) into a single PGM image with
/// 1-pixel separators; cell (r, c) shows grid[r][c] reshaped to h x w.
Eigen::MatrixXd tile_images(const std::vector<std::vector<Eigen::VectorXd>>& grid,
                            int h, int w);

}  // namespace gcx
