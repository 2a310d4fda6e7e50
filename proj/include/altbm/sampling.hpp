#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace altbm {

// Reproducible random stream identified by (seed, stream id).
//
// Substreams are derived by hashing a label (or an index) into a fresh
// stream id, so the draws a construction sees do not depend on the order
// in which sibling substreams are created or consumed.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  // Number of uniforms drawn so far.
  std::uint64_t position() const noexcept { return position_; }

  // Uniform on the open interval (0,1), 53 bits.
  double uniform();

  RandomStream substream(std::string_view label) const;
  RandomStream substream(std::uint64_t index) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t position_ = 0;
  std::mt19937_64 engine_;
};

// Stable 64-bit FNV-1a hash used for substream labels.
std::uint64_t label_hash(std::string_view label) noexcept;

// Inverse-CDF exponential transform of a uniform.
double exp_from_uniform(double u, double rate);

// Exponential variate with the given rate; consumes one uniform.
double exp_draw(double rate, RandomStream& s);

// Normal variate by Box-Muller; consumes exactly two uniforms per call,
// including the degenerate variance == 0 case, which returns `mean`.
double gauss_draw(double mean, double variance, RandomStream& s);

// Family of nested Poisson processes: level n has intensity rates[n]/2 and
// contains every arrival of level n-1.
//
// arrivals[n][0] == 0 is the conventional origin epoch; arrivals[n][k] for
// k >= 1 are the arrival epochs in (0, horizon]. embeddings[n][k] is the
// index at level n+1 of arrivals[n][k]; the copied epoch is bit-identical.
struct NestedPoissonFamily {
  std::vector<double> rates;
  double horizon = 0.0;
  std::vector<std::vector<double>> arrivals;
  std::vector<std::vector<std::size_t>> embeddings;

  std::size_t levels() const noexcept { return arrivals.size(); }
  // Number of arrivals at `level`, not counting the origin.
  std::size_t count(std::size_t level) const { return arrivals.at(level).size() - 1; }

  // Composition of the embeddings from level 0 up to `level`, applied to a
  // level-0 index.
  std::size_t embed_from_base(std::size_t base_index, std::size_t level) const;

  // Number of level-0 arrivals at or before arrivals[level][k].
  std::vector<std::size_t> base_counts(std::size_t level) const;
};

// Samples level 0 as Poisson(rates[0]/2) on (0, horizon] and builds each
// following level by superposing an independent Poisson((rates[n+1]-rates[n])/2).
// Component n draws from substream "poisson-level-n".
NestedPoissonFamily build_nested_family(std::span<const double> rates, double horizon,
                                        const RandomStream& s);

// Same construction, truncated at the `count`-th arrival of the finest
// level; that epoch becomes the horizon.
NestedPoissonFamily build_nested_family_first(std::span<const double> rates, std::size_t count,
                                              const RandomStream& s);

// Assembles a family from explicit arrival lists (origin excluded) and
// recovers the embeddings by exact epoch matching. Throws InvalidArgument
// when a coarser arrival is missing from the finer level.
NestedPoissonFamily nested_family_from_arrivals(std::vector<double> rates,
                                                const std::vector<std::vector<double>>& arrivals,
                                                double horizon);

}  // namespace altbm
