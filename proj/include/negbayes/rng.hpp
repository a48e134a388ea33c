#ifndef NEGBAYES_RNG_HPP
#define NEGBAYES_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace negbayes {

// splitmix64 finalizer (Steele, Lea, Flood 2014).
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for the index-th substream of a master seed. Substreams derived this
// way are independent of scheduling: worker i always gets the same stream.
inline uint64_t substream_seed(uint64_t master, uint64_t index) {
  return splitmix64(splitmix64(master) ^ splitmix64(index + 0x51ed2701ULL));
}

// mt19937_64 with hand-rolled uniform/int draws. std::uniform_*_distribution
// output is implementation-defined; these draws are pinned by the standard's
// mt19937_64 sequence, so results are reproducible across platforms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t u64() { return gen_(); }

  // uniform double in [0, 1), 53 random bits
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // unbiased integer in [0, n) via rejection
  uint64_t below(uint64_t n) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  // Fisher-Yates; std::shuffle is implementation-defined, this one is not
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace negbayes

#endif  // NEGBAYES_RNG_HPP
