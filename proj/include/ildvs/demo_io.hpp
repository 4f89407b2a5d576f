#pragma once

// Demonstration files. Line 1 carries the metadata,
//   # ildvs-demos task=<id> dt=<s> anchor=<w>,<x>,<y>,<z> units=f:0-100,p:cm,r:rad*100
// line 2 the column header demo,t,f1,f2,f3,f4,p1,p2,p3,r1,r2,r3 and then one
// row per recorded step with all values at 17 significant digits.

#include <iosfwd>
#include <string>

#include "ildvs/node.hpp"

namespace ildvs {

void write_demos(std::ostream& out, const Demonstrations& demos);
void write_demos(const std::string& path, const Demonstrations& demos);

// Throws ParseError with the 1-based line number of the first bad line.
Demonstrations read_demos(std::istream& in);
Demonstrations read_demos(const std::string& path);

}  // namespace ildvs
