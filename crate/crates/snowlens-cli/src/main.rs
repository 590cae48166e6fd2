fn main() {
    println!("snowlens");
}
