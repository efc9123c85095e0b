#pragma once

#include <stdexcept>
#include <string>

namespace pplab {

// Every contract failure carries a short machine-readable label
// ("gamma-empty", "bad-condenser", ...) next to the human message.
class Error : public std::runtime_error {
public:
    Error(std::string label, const std::string& message)
        : std::runtime_error(label + ": " + message), label_(std::move(label)) {}

    const std::string& label() const noexcept { return label_; }

private:
    std::string label_;
};

[[noreturn]] inline void fail(const std::string& label, const std::string& message) {
    throw Error(label, message);
}

} // namespace pplab
