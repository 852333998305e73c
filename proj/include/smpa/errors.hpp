#pragma once

#include <stdexcept>
#include <string>

namespace smpa {

// Process exit codes used by the CLI tools.
enum ExitCode : int {
    EXIT_OK = 0,
    EXIT_PARSE = 2,
    EXIT_VALIDATION = 3,
    EXIT_CONNECTION = 4,
    EXIT_PROTOCOL = 5,
};

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual int exit_code() const { return EXIT_PROTOCOL; }
};

// Input file / wire decoding problems.
struct ParseError : Error {
    using Error::Error;
    int exit_code() const override { return EXIT_PARSE; }
};

// Semantically invalid inputs or configuration.
struct ValidationError : Error {
    using Error::Error;
    int exit_code() const override { return EXIT_VALIDATION; }
};

// Networking / peer connectivity problems.
struct ConnectionError : Error {
    using Error::Error;
    int exit_code() const override { return EXIT_CONNECTION; }
};

// Protocol-level aborts (desync, inconsistent shares, formula mismatch, ...).
struct ProtocolError : Error {
    using Error::Error;
};

}  // namespace smpa
