fn main() {
    std::process::exit(anova_normal::cli::main_with_args(std::env::args_os()));
}
