from conan import ConanFile


class App(ConanFile):
    name = "app"
    settings = "os", "compiler", "build_type", "arch"
    requires = "fmt/8.0.1", "spdlog/1.9.2"
    build_requires = ["cmake/3.21.0"]
    generators = "CMakeDeps"
