#pragma once

#include <functional>

#include "doctest.h"
#include "qgraph/error.hpp"
#include "qgraph/graph.hpp"

namespace qgraph::test {

/// Runs fn and checks that it throws an Error of the given kind.
inline void check_throws_kind(const std::function<void()>& fn, ErrorKind kind) {
  try {
    fn();
    FAIL("expected an error of kind " << std::string(to_string(kind)));
  } catch (const Error& e) {
    CHECK_MESSAGE(e.kind() == kind, "got " << e.kind_name() << ": " << e.what());
  }
}

inline GraphSpec::EdgeSpec edge(std::string from, std::string to, double length = 1.0, double c = 1.0,
                                double p = 0.0) {
  GraphSpec::EdgeSpec e;
  e.from = std::move(from);
  e.to = std::move(to);
  e.length = length;
  e.conductance = c;
  e.potential = p;
  return e;
}

}  // namespace qgraph::test
