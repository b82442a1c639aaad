#include "mfldp/errors.hpp"

namespace mfldp {

ConvergenceError::ConvergenceError(const std::string& what, std::size_t iterations,
                                   double last_residual)
    : Error(what + " (iterations=" + std::to_string(iterations) +
            ", last residual=" + std::to_string(last_residual) + ")"),
      iterations_(iterations),
      last_residual_(last_residual) {}

DivergedChain::DivergedChain(std::size_t step)
    : Error("chain diverged at step " + std::to_string(step) +
            ": non-finite position, reduce the step size"),
      step_(step) {}

ConfigError::ConfigError(std::string key, const std::string& message)
    : Error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

}  // namespace mfldp
