"""Link prediction with forecasted link-formation rates."""
