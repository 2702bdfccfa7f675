#pragma once

#include "homeauth/sim.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

namespace homeauth::sim {

// Newline-delimited JSON. Line 1 is a header object ("type":"header"), then
// one "type":"event" object per trace event. Ground-truth plaintext is never
// written.

class TraceFormatError : public std::runtime_error {
public:
    TraceFormatError(std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

void write_trace(std::ostream& os, const Trace& trace);
Trace read_trace(std::istream& is);

} // namespace homeauth::sim
