namespace votecheck {
}
