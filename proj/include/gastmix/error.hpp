#ifndef GASTMIX_ERROR_HPP
#define GASTMIX_ERROR_HPP

#include <stdexcept>
#include <string>

namespace gastmix {

// Malformed or inconsistent input data. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace gastmix

#endif
