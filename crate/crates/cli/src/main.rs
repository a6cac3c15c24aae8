fn main() {
    println!("satcast");
}
