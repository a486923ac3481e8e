#pragma once

#include <stdexcept>
#include <string>

namespace chieb {

// Gamma-function pole (non-positive even df, non-positive integer argument).
class pole_error : public std::domain_error {
public:
    explicit pole_error(const std::string& what) : std::domain_error(what) {}
};

// Iteration caps exceeded, singular systems, failed brackets.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

class insufficient_data_error : public std::invalid_argument {
public:
    explicit insufficient_data_error(const std::string& what)
        : std::invalid_argument(what) {}
};

class config_error : public std::invalid_argument {
public:
    explicit config_error(const std::string& what) : std::invalid_argument(what) {}
};

class data_error : public std::invalid_argument {
public:
    explicit data_error(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace chieb
