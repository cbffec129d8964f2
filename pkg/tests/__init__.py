# Package for unit tests
