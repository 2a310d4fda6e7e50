#include "altbm/sampling.hpp"

#include <cmath>
#include <numbers>

#include "altbm/errors.hpp"

namespace altbm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

std::uint64_t label_hash(std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

double RandomStream::uniform() {
  ++position_;
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

RandomStream RandomStream::substream(std::string_view label) const {
  return RandomStream(seed_, splitmix64(stream_id_ ^ splitmix64(label_hash(label))));
}

RandomStream RandomStream::substream(std::uint64_t index) const {
  return RandomStream(seed_, splitmix64(splitmix64(stream_id_) + index * 0xd1b54a32d192ed03ULL));
}

double exp_from_uniform(double u, double rate) {
  if (!(rate > 0.0)) throw InvalidArgument("exp_draw: rate must be > 0");
  return -std::log(u) / rate;
}

double exp_draw(double rate, RandomStream& s) { return exp_from_uniform(s.uniform(), rate); }

double gauss_draw(double mean, double variance, RandomStream& s) {
  if (!(variance >= 0.0)) throw InvalidArgument("gauss_draw: variance must be >= 0");
  const double u1 = s.uniform();
  const double u2 = s.uniform();
  if (variance == 0.0) return mean;
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return mean + std::sqrt(variance) * z;
}

std::size_t NestedPoissonFamily::embed_from_base(std::size_t base_index, std::size_t level) const {
  std::size_t k = base_index;
  if (k >= arrivals.at(0).size()) throw IndexBeyondHorizon("base index beyond level-0 arrivals");
  for (std::size_t n = 0; n < level; ++n) k = embeddings.at(n).at(k);
  return k;
}

std::vector<std::size_t> NestedPoissonFamily::base_counts(std::size_t level) const {
  const std::size_t size = arrivals.at(level).size();
  std::vector<std::size_t> out(size, 0);
  std::size_t base = 0;
  std::size_t next_pos = count(0) >= 1 ? embed_from_base(1, level) : size;
  for (std::size_t k = 0; k < size; ++k) {
    while (next_pos <= k) {
      ++base;
      next_pos = base + 1 <= count(0) ? embed_from_base(base + 1, level) : size;
    }
    out[k] = base;
  }
  return out;
}

namespace {

void check_rates(std::span<const double> rates) {
  if (rates.empty()) throw InvalidArgument("nested family: at least one rate required");
  for (std::size_t n = 0; n < rates.size(); ++n) {
    if (!(rates[n] > 0.0) || !std::isfinite(rates[n]))
      throw InvalidArgument("nested family: rates must be finite and > 0");
    if (n > 0 && !(rates[n] > rates[n - 1]))
      throw InvalidArgument("nested family: rates must be strictly increasing");
  }
}

std::vector<double> poisson_epochs(double rate, double horizon, RandomStream s) {
  std::vector<double> out;
  double t = exp_draw(rate, s);
  while (t <= horizon) {
    out.push_back(t);
    t += exp_draw(rate, s);
  }
  return out;
}

// Merges `coarse` (with origin) and `extra` (without origin); returns the
// merged list and the index of each coarse epoch inside it.
std::pair<std::vector<double>, std::vector<std::size_t>> superpose(
    const std::vector<double>& coarse, const std::vector<double>& extra) {
  std::vector<double> merged;
  std::vector<std::size_t> index;
  merged.reserve(coarse.size() + extra.size());
  index.reserve(coarse.size());
  merged.push_back(coarse[0]);
  index.push_back(0);
  std::size_t i = 1, j = 0;
  while (i < coarse.size() || j < extra.size()) {
    if (j == extra.size() || (i < coarse.size() && coarse[i] <= extra[j])) {
      index.push_back(merged.size());
      merged.push_back(coarse[i++]);
    } else {
      merged.push_back(extra[j++]);
    }
  }
  return {std::move(merged), std::move(index)};
}

}  // namespace

NestedPoissonFamily build_nested_family(std::span<const double> rates, double horizon,
                                        const RandomStream& s) {
  check_rates(rates);
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw InvalidArgument("nested family: horizon must be finite and > 0");
  NestedPoissonFamily fam;
  fam.rates.assign(rates.begin(), rates.end());
  fam.horizon = horizon;

  std::vector<double> level{0.0};
  const auto base = poisson_epochs(rates[0] / 2.0, horizon, s.substream("poisson-level-0"));
  level.insert(level.end(), base.begin(), base.end());
  fam.arrivals.push_back(level);
  for (std::size_t n = 1; n < rates.size(); ++n) {
    const auto extra = poisson_epochs((rates[n] - rates[n - 1]) / 2.0, horizon,
                                      s.substream("poisson-level-" + std::to_string(n)));
    auto [merged, index] = superpose(fam.arrivals.back(), extra);
    fam.embeddings.push_back(std::move(index));
    fam.arrivals.push_back(std::move(merged));
  }
  return fam;
}

NestedPoissonFamily build_nested_family_first(std::span<const double> rates, std::size_t count,
                                              const RandomStream& s) {
  check_rates(rates);
  if (count == 0) throw InvalidArgument("nested family: arrival count must be >= 1");
  // Each component stream is consumed from its start, so regenerating with
  // a longer horizon only extends the same arrival sequence.
  double horizon = 2.0 * static_cast<double>(count) / rates.back() * 1.5 + 1.0 / rates.back();
  NestedPoissonFamily fam = build_nested_family(rates, horizon, s);
  while (fam.count(fam.levels() - 1) < count) {
    horizon *= 2.0;
    fam = build_nested_family(rates, horizon, s);
  }
  const double cut = fam.arrivals.back()[count];
  fam.horizon = cut;
  for (std::size_t n = 0; n < fam.levels(); ++n) {
    auto& a = fam.arrivals[n];
    while (a.back() > cut) a.pop_back();
    if (n + 1 < fam.levels()) fam.embeddings[n].resize(a.size());
  }
  return fam;
}

NestedPoissonFamily nested_family_from_arrivals(std::vector<double> rates,
                                                const std::vector<std::vector<double>>& arrivals,
                                                double horizon) {
  check_rates(rates);
  if (arrivals.size() != rates.size())
    throw InvalidArgument("nested family: one arrival list per rate required");
  NestedPoissonFamily fam;
  fam.rates = std::move(rates);
  fam.horizon = horizon;
  for (const auto& list : arrivals) {
    std::vector<double> level{0.0};
    for (double t : list) {
      if (!(t > level.back()) || t > horizon)
        throw InvalidArgument("nested family: arrivals must be increasing within (0, horizon]");
      level.push_back(t);
    }
    fam.arrivals.push_back(std::move(level));
  }
  for (std::size_t n = 0; n + 1 < fam.levels(); ++n) {
    const auto& coarse = fam.arrivals[n];
    const auto& fine = fam.arrivals[n + 1];
    std::vector<std::size_t> index{0};
    std::size_t j = 1;
    for (std::size_t k = 1; k < coarse.size(); ++k) {
      while (j < fine.size() && fine[j] < coarse[k]) ++j;
      if (j == fine.size() || fine[j] != coarse[k])
        throw InvalidArgument("nested family: level " + std::to_string(n) + " arrival " +
                              std::to_string(k) + " missing from level " + std::to_string(n + 1));
      index.push_back(j);
    }
    fam.embeddings.push_back(std::move(index));
  }
  return fam;
}

}  // namespace altbm
