#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pcm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using IndexSet = std::vector<std::size_t>;

/// Observations (X, Y, Z) stored row-wise. Immutable once constructed.
///
/// Invariants: equal row counts n >= 1, d_X >= 1, all entries finite.
/// d_Z = 0 is representable, but every test in the library rejects it.
class Dataset {
 public:
  Dataset(Matrix x, Vector y, Matrix z);

  const Matrix& x() const noexcept { return x_; }
  const Vector& y() const noexcept { return y_; }
  const Matrix& z() const noexcept { return z_; }

  Index n() const noexcept { return y_.size(); }
  Index d_x() const noexcept { return x_.cols(); }
  Index d_z() const noexcept { return z_.cols(); }

  /// Horizontal concatenation [X | Z]; X columns first.
  Matrix xz() const;

  /// Rows selected by `rows`, in that order.
  Dataset subset(std::span<const std::size_t> rows) const;

  /// Same covariates with a different response.
  Dataset with_response(Vector y) const;

 private:
  Matrix x_;
  Vector y_;
  Matrix z_;
};

/// Seed plus stream identifier for a reproducible pseudo-random sequence.
///
/// Identical (seed, stream_id) pairs always give identical draws. `derive`
/// produces child streams purely from the parent, so work can be fanned out
/// to threads without the draws depending on scheduling.
class RngStream {
 public:
  using Engine = std::mt19937_64;

  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  RngStream derive(std::uint64_t child) const;
  Engine engine() const;

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
};

/// Complementary pair of index sets; `first` has ceil(n/2) elements.
struct SplitPair {
  IndexSet first;
  IndexSet second;
};

struct SplitPlan {
  std::vector<SplitPair> pairs;
  std::size_t total_n = 0;
};

/// Uniformly random balanced partition of {0, ..., n-1}. Both halves sorted.
SplitPair split(std::size_t n, const RngStream& stream);

/// B independent balanced splits; pair b uses stream.derive(b).
SplitPlan multi_split(std::size_t n, std::size_t B, const RngStream& stream);

/// Random partition of {0, ..., n-1} into k folds whose sizes differ by at most 1.
std::vector<IndexSet> partition(std::size_t n, std::size_t k, const RngStream& stream);

/// Assignment of CSV columns to x, y and z, e.g. "x=x1,x2;y=y;z=z1..z7".
///
/// "z1..z7" expands to z1, z2, ..., z7. The y group must name exactly one column.
struct ColumnSchema {
  std::vector<std::string> x;
  std::string y;
  std::vector<std::string> z;

  static ColumnSchema parse(std::string_view text);
  /// x1..x{dx}, y, z1..z{dz}.
  static ColumnSchema default_for(Index d_x, Index d_z);
  std::string to_string() const;
};

Dataset read_dataset(std::istream& in, const ColumnSchema& schema);
Dataset load_dataset(const std::filesystem::path& path, const ColumnSchema& schema);

/// Writes a CSV whose header follows `schema`; doubles use shortest round-trip form.
void write_dataset(std::ostream& out, const Dataset& data, const ColumnSchema& schema);
void save_dataset(const std::filesystem::path& path, const Dataset& data,
                  const ColumnSchema& schema);

/// Runs body(i) for i in [0, count) on up to `threads` workers.
/// Exceptions from the body are rethrown on the calling thread.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

/// Worker count from PCM_THREADS when set, else hardware concurrency.
unsigned default_thread_count();

}  // namespace pcm
