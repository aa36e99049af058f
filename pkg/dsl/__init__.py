# Model DSL package
