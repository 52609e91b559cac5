#include "geosteer/rng.hpp"

#include "geosteer/errors.hpp"

#include <sstream>

namespace geosteer {

Rng Rng::stream(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32), 0x9e3779b9u};
  Rng rng;
  rng.engine_.seed(seq);
  return rng;
}

Eigen::VectorXd Rng::normal_vector(Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
  return v;
}

std::string Rng::save() const {
  std::ostringstream os;
  os.precision(17);
  os << engine_ << ' ' << normal_ << ' ' << uniform_;
  return os.str();
}

void Rng::load(const std::string& state) {
  std::istringstream is(state);
  std::mt19937_64 engine;
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  is >> engine >> normal >> uniform;
  if (!is) throw InputError("malformed RNG state");
  engine_ = engine;
  normal_ = normal;
  uniform_ = uniform;
}

}  // namespace geosteer
