#pragma once

namespace lungphase::cli {

// Entry point for the `lungphase` executable. Returns 0 on success, 1 on a
// user or input error (with an `error code=... message="..."` line on
// stderr), 2 on an internal error.
int run(int argc, char** argv);

} // namespace lungphase::cli
