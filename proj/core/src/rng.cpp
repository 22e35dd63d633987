#include <cstdlib>
#include <string>
#include <thread>

#include "otsym/error.hpp"
#include "otsym/parallel.hpp"
#include "otsym/rng.hpp"

namespace otsym {

namespace {

std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) noexcept {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ (stream * 0xd1342543de82ef95ULL));
  return splitmix64(h ^ (index + 0x632be59bd9b4e019ULL));
}

unsigned default_threads() {
  if (const char* env = std::getenv("OT_SYMMETRY_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
      // fall through to the hardware count
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::Domain: return "Domain";
    case ErrorCode::SphericalZeroVector: return "SphericalZeroVector";
    case ErrorCode::InvalidGroup: return "InvalidGroup";
    case ErrorCode::IncompatibleERD: return "IncompatibleERD";
    case ErrorCode::InvalidReference: return "InvalidReference";
    case ErrorCode::NonFiniteCost: return "NonFiniteCost";
    case ErrorCode::DuplicateNorms: return "DuplicateNorms";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NotSPD: return "NotSPD";
    case ErrorCode::SingularERD: return "SingularERD";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::UnknownScenario: return "UnknownScenario";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

}  // namespace otsym
