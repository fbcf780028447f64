#pragma once

#include <stdexcept>
#include <string>

namespace memocr {

// Base for every error the library raises on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidBudget : public Error {
public:
    using Error::Error;
};

// A single word at its scale is wider than the usable line width.
class WordTooWide : public Error {
public:
    using Error::Error;
};

class EmptyContext : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

// Raised by drafter/reader clients. `step` is the lifecycle step that failed,
// or -1 when the failure happened outside drafting.
class ClientError : public Error {
public:
    explicit ClientError(const std::string& what, int step = -1) : Error(what), step_(step) {}
    int step() const noexcept { return step_; }

private:
    int step_;
};

class GroupTooSmall : public Error {
public:
    using Error::Error;
};

class ZeroWeightSum : public Error {
public:
    using Error::Error;
};

class UndefinedReference : public Error {
public:
    using Error::Error;
};

class DegenerateSamples : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace memocr
