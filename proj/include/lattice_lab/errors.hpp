#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace lattice_lab {

/// Bad input: out-of-range parameters, malformed configs, violated
/// preconditions. The CLI maps this family to exit code 1.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation that started from valid input but could not finish
/// (non-finite values, blow-up, exhausted budget). CLI exit code 2.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what,
                            std::optional<std::size_t> cell = std::nullopt)
        : std::runtime_error(what), cell_(cell) {}

    /// Offending grid cell, when the failure is localized.
    [[nodiscard]] std::optional<std::size_t> cell() const noexcept { return cell_; }

private:
    std::optional<std::size_t> cell_;
};

}  // namespace lattice_lab
