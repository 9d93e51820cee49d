#pragma once

#include <stdexcept>
#include <string>

namespace gwr
{

// Malformed input: bad job files, invalid orders, violated preconditions.
class validation_error : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

// Operands built over different coefficient rings or truncation ledgers.
class mismatch_error : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

// A computation left the retained window or failed to terminate in its filtration.
class computation_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class truncation_error : public computation_error
{
public:
    using computation_error::computation_error;
};

} // namespace gwr
