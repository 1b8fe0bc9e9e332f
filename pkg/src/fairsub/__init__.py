"""Fair asynchronous subtyping for binary session types."""
