#pragma once

#include <stdexcept>
#include <string>

namespace dtr {

// Filesystem/stream failures; distinguished from validation errors so the
// CLI can map them to a separate exit code.
class io_error : public std::runtime_error {
  public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dtr
