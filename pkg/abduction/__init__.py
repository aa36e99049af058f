# Abduction package
