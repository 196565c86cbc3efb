fn main() {
    eprintln!("jetkit CLI under construction");
    std::process::exit(2);
}
