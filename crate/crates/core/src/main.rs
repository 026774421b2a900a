// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(polarseg_core::cli::run_command(std::env::args_os()));
}
