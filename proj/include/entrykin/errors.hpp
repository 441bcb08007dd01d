#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace entrykin {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition.
struct ContractViolation : Error {
    using Error::Error;
};

/// Tabulated probability map queried outside its table.
struct ExtrapolationError : Error {
    using Error::Error;
};

/// Exact enumeration requested beyond its size limit.
struct SizeError : Error {
    using Error::Error;
};

/// Admissible time step collapsed (transport coefficient too large for the grid).
struct StepSizeError : Error {
    using Error::Error;
};

/// Diffusion coefficient negative or implicit solve broke down.
struct ParabolicityError : Error {
    using Error::Error;
};

/// Total mass drifted outside tolerance.
struct MassViolation : Error {
    using Error::Error;
};

/// Config validation failure; carries every message, not only the first.
struct ConfigError : Error {
    explicit ConfigError(std::vector<std::string> msgs);
    std::vector<std::string> messages;
};

}  // namespace entrykin
