"""CyBeR-0: Byzantine-resilient federated zero-order optimization."""
