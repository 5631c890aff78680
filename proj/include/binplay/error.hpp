#pragma once

#include <stdexcept>
#include <string>

namespace binplay {

// All library errors carry a stable kebab-case tag as the message prefix
// ("tag: detail") so the CLI and tests can match on them.
class Error : public std::runtime_error {
public:
    Error(std::string tag, const std::string& detail)
        : std::runtime_error(tag + ": " + detail), tag_(std::move(tag)) {}

    const std::string& tag() const { return tag_; }

private:
    std::string tag_;
};

[[noreturn]] inline void fail(const std::string& tag, const std::string& detail) {
    throw Error(tag, detail);
}

}  // namespace binplay
