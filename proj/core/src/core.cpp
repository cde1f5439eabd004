#include "pcm/core.hpp"

#include "pcm/error.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace pcm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Dataset::Dataset(Matrix x, Vector y, Matrix z)
    : x_(std::move(x)), y_(std::move(y)), z_(std::move(z)) {
  if (y_.size() < 1) {
    throw InvalidArgument("dataset must contain at least one row");
  }
  if (x_.rows() != y_.size() || z_.rows() != y_.size()) {
    throw InvalidArgument("x, y and z must have the same number of rows");
  }
  if (x_.cols() < 1) {
    throw InvalidArgument("x must have at least one column");
  }
  if (!x_.allFinite() || !y_.allFinite() || !z_.allFinite()) {
    throw InvalidArgument("dataset entries must be finite");
  }
}

Matrix Dataset::xz() const {
  Matrix out(n(), d_x() + d_z());
  out << x_, z_;
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  const auto m = static_cast<Index>(rows.size());
  Matrix x(m, d_x());
  Vector y(m);
  Matrix z(m, d_z());
  for (Index i = 0; i < m; ++i) {
    const auto r = static_cast<Index>(rows[static_cast<std::size_t>(i)]);
    if (r < 0 || r >= n()) {
      throw InvalidArgument("subset row index out of range");
    }
    x.row(i) = x_.row(r);
    y(i) = y_(r);
    z.row(i) = z_.row(r);
  }
  return Dataset(std::move(x), std::move(y), std::move(z));
}

Dataset Dataset::with_response(Vector y) const { return Dataset(x_, std::move(y), z_); }

RngStream RngStream::derive(std::uint64_t child) const {
  const std::uint64_t key = splitmix64(seed_ ^ splitmix64(stream_id_ + 0x632be59bd9b4e019ULL));
  return RngStream(key, child);
}

RngStream::Engine RngStream::engine() const {
  std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                    static_cast<std::uint32_t>(stream_id_),
                    static_cast<std::uint32_t>(stream_id_ >> 32)};
  return Engine(seq);
}

SplitPair split(std::size_t n, const RngStream& stream) {
  if (n < 2) {
    throw InvalidArgument("split requires n >= 2");
  }
  IndexSet perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  auto eng = stream.engine();
  std::shuffle(perm.begin(), perm.end(), eng);

  const std::size_t half = (n + 1) / 2;
  SplitPair out;
  out.first.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(half));
  out.second.assign(perm.begin() + static_cast<std::ptrdiff_t>(half), perm.end());
  std::sort(out.first.begin(), out.first.end());
  std::sort(out.second.begin(), out.second.end());
  return out;
}

SplitPlan multi_split(std::size_t n, std::size_t B, const RngStream& stream) {
  if (B == 0) {
    throw InvalidArgument("multi_split requires B >= 1");
  }
  SplitPlan plan;
  plan.total_n = n;
  plan.pairs.reserve(B);
  for (std::size_t b = 0; b < B; ++b) {
    plan.pairs.push_back(split(n, stream.derive(b)));
  }
  return plan;
}

std::vector<IndexSet> partition(std::size_t n, std::size_t k, const RngStream& stream) {
  if (k == 0 || n < k) {
    throw InvalidArgument("partition requires 1 <= k <= n");
  }
  IndexSet perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  auto eng = stream.engine();
  std::shuffle(perm.begin(), perm.end(), eng);

  std::vector<IndexSet> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                    perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(folds[f].begin(), folds[f].end());
    pos += size;
  }
  return folds;
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("PCM_THREADS")) {
    const int value = std::atoi(env);
    if (value > 0) return static_cast<unsigned>(value);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace pcm
