#pragma once

namespace twinforge {

// Full command-line driver. Returns the process exit status:
//   0  success, no findings
//   1  domain findings (validator errors, diff differences, fit/bind
//      failures, defects in user-supplied model text)
//   2  usage or environment trouble (bad flags, missing files, endpoint
//      unreachable, no matching replay fixture)
//   3  internal error
int run(int argc, const char* const* argv);

} // namespace twinforge
