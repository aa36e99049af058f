# Orchestrator package
