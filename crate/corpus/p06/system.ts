vars s, u;
init s >= 1 && u = 0;
next s' = s && ((u < s && (u' = u + 1 || u' = u)) || (u > s && u' = u - 1) || (u = s && u' = u));
