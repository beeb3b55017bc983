#include "gmfs/rng.hpp"

namespace gmfs {

Rng::Rng(StreamTag tag, std::initializer_list<std::uint64_t> key)
    : engine_(splitmix64(stream_key(key) ^ static_cast<std::uint64_t>(tag))) {}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const unsigned __int128 prod =
        static_cast<unsigned __int128>(engine_()) * static_cast<unsigned __int128>(n);
    if (static_cast<std::uint64_t>(prod) >= threshold) {
      return static_cast<std::uint64_t>(prod >> 64);
    }
  }
}

}  // namespace gmfs
