fn main() {
    rdrbm::run()
}
