#include "isoflow/random.hpp"

namespace isoflow {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

StreamKey StreamKey::root(std::uint64_t seed) noexcept {
  return {mix64(seed + kGolden), mix64(~seed + 3 * kGolden)};
}

StreamKey StreamKey::child(std::uint64_t index) const noexcept {
  const std::uint64_t h = mix64(offset ^ mix64(index + salt));
  return {mix64(h + kGolden), mix64(h ^ salt ^ (index * kGolden))};
}

// Two mixing rounds: streams whose Weyl sequences happen to overlap are still
// decorrelated by their distinct salts.
CounterEngine::result_type CounterEngine::operator()() noexcept {
  ++counter_;
  return mix64(mix64(key_.offset + counter_ * kGolden) ^ key_.salt);
}

double RandomStream::uniform() noexcept {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

} // namespace isoflow
