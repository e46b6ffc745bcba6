from conans import ConanFile


class Lib(ConanFile):
    python_requires = "base/1.0"
    options = {"with_x": [True, False]}

    def requirements(self):
        self.requires("openssl/1.1.1l")
        self.requires("zlib/1.2.11", override=True)
        if self.options.with_x:
            self.requires("libx11/1.7.2")

    def build_requirements(self):
        self.build_requires("gtest/1.11.0")
        # self.requires("commented/1.0")
