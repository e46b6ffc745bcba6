from conan import ConanFile


class Tool(ConanFile):
    requires = (
        "eigen/3.4.0",
        "nlohmann_json/3.10.5",
    )
    tool_requires = "protobuf/3.21.4"

    def requirements(self):
        self.requires(f"boost/{self._boost_version}")
