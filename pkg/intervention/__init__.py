# Intervention package
