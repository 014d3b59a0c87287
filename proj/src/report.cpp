// aggregated report serialization lives in the cli for now
