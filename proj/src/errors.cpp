#include "entrykin/errors.hpp"

namespace entrykin {

namespace {
std::string join(const std::vector<std::string>& msgs) {
    std::string out;
    for (const auto& m : msgs) {
        if (!out.empty()) out += "; ";
        out += m;
    }
    return out;
}
}  // namespace

ConfigError::ConfigError(std::vector<std::string> msgs) : Error(join(msgs)), messages(std::move(msgs)) {}

}  // namespace entrykin
