#pragma once

namespace riskformer {

// Subcommands: generate, train, evaluate, audit, compare, sweep-heads,
// sweep-contamination. Returns 0 on success, 1 on usage errors, 2 on runtime
// errors (including a failed gradient audit).
int cli_main(int argc, char** argv);

}  // namespace riskformer
