# Utils tests
